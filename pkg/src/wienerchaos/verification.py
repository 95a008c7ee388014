"""Seeded random battery over the library's identities and inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .bounds import (
    bound_report,
    cumulant_majorant_check,
    delta_pair_terms,
    expansion_pair_terms,
    pair_estimate_check,
)
from .chaos_algebra import fourth_cumulant_closed, moment, product
from .cumulant_engine import (
    closed_form_per_ordering,
    constant_c,
    cumulant_closed_form,
    cumulants_from_moments,
    moments_via_wick,
)
from .malliavin_ops import cumulant_via_gamma, gamma_expectations
from .random_instances import random_multi_index, random_pure_vector
from .tensor_core import contract_sym, contraction_norm_sq, norm_sq

__all__ = ["ABS_FLOOR", "BatteryResult", "CheckTally", "close", "rel_err", "run_battery"]

ABS_FLOOR = 1e-12


def rel_err(a: float, b: float, rtol: float) -> float:
    """Error of ``a`` against ``b`` in units where ``<= rtol`` means agreement.

    Relative to the larger magnitude, except that differences below
    :data:`ABS_FLOOR` always count as agreement.
    """
    diff = abs(a - b)
    return diff / max(abs(a), abs(b), ABS_FLOOR / rtol)


def close(a: float, b: float, rtol: float) -> bool:
    return rel_err(a, b, rtol) <= rtol


@dataclass
class CheckTally:
    """Counts for one invariant; ``tol`` is a relative tolerance (0 for flags)."""

    tol: float
    checked: int = 0
    failed: int = 0
    worst: float = 0.0
    first_failure: str | None = None

    def _note(self, ok: bool, error: float, context: str) -> None:
        self.checked += 1
        self.worst = max(self.worst, error)
        if not ok:
            self.failed += 1
            if self.first_failure is None:
                self.first_failure = context

    def compare(self, a: float, b: float, context: str) -> None:
        error = rel_err(a, b, self.tol)
        self._note(error <= self.tol, error, context)

    def flag(self, ok: bool, context: str) -> None:
        self._note(bool(ok), 0.0 if ok else 1.0, context)

    def as_dict(self) -> dict:
        return {
            "checked": self.checked,
            "failed": self.failed,
            "worst": self.worst,
            "tolerance": self.tol,
            "first_failure": self.first_failure,
        }


def _corrupted_constant(q_ordering, rtuple, convention="derived"):
    return constant_c(q_ordering, rtuple, convention) + 1


@dataclass
class BatteryResult:
    tallies: dict[str, CheckTally] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t.failed == 0 for t in self.tallies.values())

    def as_dict(self) -> dict:
        return {name: t.as_dict() for name, t in self.tallies.items()}


def run_battery(instances: int, seed: int, inject_fault: bool = False) -> BatteryResult:
    """Run every invariant on ``instances`` random pure vectors.

    ``inject_fault`` perturbs the cumulant constant by one (negative control).
    """
    rng = np.random.default_rng(seed)
    tallies = {
        "closed_form_vs_oracle": CheckTally(1e-9),
        "gamma_vs_closed_form_per_ordering": CheckTally(1e-10),
        "gamma_averaged_vs_oracle": CheckTally(1e-9),
        "fourth_cumulant_closed_vs_oracle": CheckTally(1e-10),
        "moment_product_vs_wick": CheckTally(1e-10),
        "delta_le_psi": CheckTally(0.0),
        "delta_pair_terms_vs_expansion": CheckTally(1e-10),
        "pair_term_estimates": CheckTally(0.0),
        "fourth_cumulant_majorants": CheckTally(0.0),
        "symmetrized_square_identity": CheckTally(1e-10),
        "contraction_norm_paths": CheckTally(1e-12),
        "contraction_norm_chain": CheckTally(0.0),
        "product_commutes": CheckTally(1e-10),
    }
    constant = _corrupted_constant if inject_fault else constant_c

    for n in range(instances):
        F = random_pure_vector(rng, max_components=3, max_order=3, max_dim=4)
        m = random_multi_index(rng, len(F), 3, 4)
        kernels = F.kernels
        ctx = f"instance {n}: orders={F.orders}, dim={F.dim}, m={m}"

        oracle = cumulants_from_moments(F, m)
        closed = cumulant_closed_form(F, m, constant=constant)
        tallies["closed_form_vs_oracle"].compare(closed, oracle, ctx)
        tallies["gamma_averaged_vs_oracle"].compare(cumulant_via_gamma(F, m), oracle, ctx)
        scale = factorial(sum(m) - 1)
        per_closed = closed_form_per_ordering(F, m, constant=constant)
        for path, value in gamma_expectations(F, m).items():
            tallies["gamma_vs_closed_form_per_ordering"].compare(
                scale * value, per_closed[path], f"{ctx}, ordering={path}")

        tallies["moment_product_vs_wick"].compare(moment(F, m), moments_via_wick(F, m), ctx)

        for i, f in enumerate(kernels):
            e_i = tuple(4 if j == i else 0 for j in range(len(F)))
            tallies["fourth_cumulant_closed_vs_oracle"].compare(
                fourth_cumulant_closed(f), cumulants_from_moments(F, e_i), f"{ctx}, component {i}")
            p = f.order
            lhs = factorial(2 * p) * norm_sq(contract_sym(f, f, 0))
            rhs = 2 * factorial(p) ** 2 * norm_sq(f) ** 2 + factorial(p) ** 2 * sum(
                comb(p, r) ** 2 * contraction_norm_sq(f, f, r) for r in range(1, p))
            tallies["symmetrized_square_identity"].compare(lhs, rhs, f"{ctx}, component {i}")

        report = bound_report(F)
        tallies["delta_le_psi"].flag(report.delta_le_psi, ctx)
        T = delta_pair_terms(F)
        M = expansion_pair_terms(F)
        for i in range(len(F)):
            for j in range(len(F)):
                pctx = f"{ctx}, pair=({i},{j})"
                tallies["delta_pair_terms_vs_expansion"].compare(T[i, j], M[i, j], pctx)
                f, g = kernels[i], kernels[j]
                tallies["pair_term_estimates"].flag(pair_estimate_check(f, g).holds, pctx)
                tallies["fourth_cumulant_majorants"].flag(cumulant_majorant_check(f, g).holds, pctx)
                for r in range(min(f.order, g.order) + 1):
                    dense = contraction_norm_sq(f, g, r, "dense")
                    gram = contraction_norm_sq(f, g, r, "gram")
                    tallies["contraction_norm_paths"].compare(dense, gram, pctx)
                    sym = norm_sq(contract_sym(f, g, r))
                    chain_ok = (sym <= dense * (1 + 1e-12) + 1e-15
                                and dense <= norm_sq(f) * norm_sq(g) * (1 + 1e-12) + 1e-15)
                    tallies["contraction_norm_chain"].flag(chain_ok, pctx)
                A, B = F.components[i], F.components[j]
                ab, ba = product(A, B), product(B, A)
                tallies["product_commutes"].compare(
                    math.sqrt((ab - ba).l2_norm_sq()) + math.sqrt(ab.l2_norm_sq()),
                    math.sqrt(ab.l2_norm_sq()), pctx)

    return BatteryResult(tallies)

