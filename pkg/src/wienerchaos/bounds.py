"""Gaussian-approximation quantities for pure chaos vectors.

``delta_C`` is computed from exact chaos expansions of the Malliavin gradient
pairings; :func:`contraction_expansion_norm` evaluates the same pair terms from a
contraction-norm expansion and serves as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Sequence

import numpy as np

from .chaos_algebra import ChaosExpansion, ChaosVector, covariance_matrix, fourth_cumulant_closed
from .malliavin_ops import pairing
from .tensor_core import SymmetricKernel, contract_sym, contraction_norm_sq, inner, norm_sq

__all__ = [
    "SINGULAR_RTOL",
    "BoundReport",
    "MajorantResult",
    "PairEstimate",
    "bound_report",
    "contraction_expansion_norm",
    "cumulant_majorant_check",
    "d1_bound",
    "d2_bound",
    "delta_C",
    "delta_pair_terms",
    "expansion_pair_terms",
    "jacobi_eigenvalues",
    "opnorm",
    "pair_estimate_check",
    "psi",
]

SINGULAR_RTOL = 1e-12


def delta_pair_terms(F: ChaosVector) -> np.ndarray:
    """Matrix of ``E[(C_ij - <DF_i, DF_j> / q_j)^2]`` over ordered pairs."""
    kernels = F.kernels
    C = covariance_matrix(F)
    d = len(kernels)
    T = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            # <DF_i, DF_j> / q_j is the pairing of f_i with I_{q_j}(f_j)
            scaled = pairing(kernels[i], ChaosExpansion.pure(kernels[j]))
            residual = ChaosExpansion.constant(F.dim, C[i, j]) - scaled
            T[i, j] = residual.l2_norm_sq()
    return T


def delta_C(F: ChaosVector) -> float:
    return math.sqrt(float(np.sum(delta_pair_terms(F))))


def contraction_expansion_norm(f: SymmetricKernel, g: SymmetricKernel, alpha: float) -> float:
    """``E[(alpha - <D I_p(f), D I_q(g)> / q)^2]`` from symmetrized contraction norms, ``p <= q``."""
    p, q = f.order, g.order
    if p > q:
        raise ValueError(f"expansion needs p <= q, got p={p}, q={q}")
    if p < 1:
        raise ValueError("orders must be >= 1")
    if p < q:
        total = alpha ** 2
        for r in range(1, p + 1):
            total += (p ** 2 * factorial(r - 1) ** 2 * comb(p - 1, r - 1) ** 2
                      * comb(q - 1, r - 1) ** 2 * factorial(p + q - 2 * r)
                      * norm_sq(contract_sym(f, g, r)))
        return total
    expected = factorial(p) * inner(f, g)
    total = (alpha - expected) ** 2
    for r in range(1, p):
        total += (p ** 2 * factorial(r - 1) ** 2 * comb(p - 1, r - 1) ** 4
                  * factorial(2 * p - 2 * r) * norm_sq(contract_sym(f, g, r)))
    return total


def expansion_pair_terms(F: ChaosVector) -> np.ndarray:
    """Pair terms of ``delta_C`` rebuilt from :func:`contraction_expansion_norm`.

    When ``q_i > q_j`` the expansion is taken with the roles swapped and
    rescaled by ``(q_i / q_j)^2``, since the divisor is ``q_j`` rather than
    the larger order.
    """
    kernels = F.kernels
    C = covariance_matrix(F)
    d = len(kernels)
    T = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            qi, qj = kernels[i].order, kernels[j].order
            if qi <= qj:
                T[i, j] = contraction_expansion_norm(kernels[i], kernels[j], C[i, j])
            else:
                T[i, j] = (qi / qj) ** 2 * contraction_expansion_norm(kernels[j], kernels[i], 0.0)
    return T


def psi(q: Sequence[int], x: Sequence[float], y: Sequence[float]) -> float:
    """Upper bound for ``delta_C`` from fourth cumulants ``x`` and variances ``y``.

    Evaluated term by term as stated, including the double sum over ``(i, j)``
    whose equal-order summand does not depend on ``j``.
    """
    if not len(q) == len(x) == len(y):
        raise ValueError("q, x and y must have the same length")
    if any(v < 0 for v in y):
        raise ValueError("variances must be non-negative")
    d = len(q)
    total = 0.0
    for i in range(d):
        for j in range(d):
            if q[i] == q[j]:
                s = sum(comb(2 * r, r) for r in range(1, q[i]))
                total += math.sqrt(2 * s) * abs(x[i]) ** 0.5
            else:
                total += math.sqrt(2) * math.sqrt(y[j]) * abs(x[i]) ** 0.25
                for r in range(1, min(q[i], q[j])):
                    total += (math.sqrt(2 * factorial(q[i] + q[j] - 2 * r))
                              * comb(q[j], r) * abs(x[i]) ** 0.5)
    return total


def jacobi_eigenvalues(M: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    n = A.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(A ** 2) - np.sum(np.diag(A) ** 2)))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))


def opnorm(M: np.ndarray) -> float:
    """Operator norm of a symmetric matrix (largest absolute eigenvalue)."""
    eig = jacobi_eigenvalues(M)
    return float(np.max(np.abs(eig))) if eig.size else 0.0


def d2_bound(F: ChaosVector) -> float:
    return delta_C(F) / 2.0


def _d1_from(C: np.ndarray, delta: float) -> float:
    eig = np.abs(jacobi_eigenvalues(C))
    largest = float(eig.max())
    smallest = float(eig.min())
    if largest == 0.0 or smallest < SINGULAR_RTOL * largest:
        return math.inf
    return (1.0 / smallest) * math.sqrt(largest) * delta


def d1_bound(F: ChaosVector) -> float:
    """``||C^{-1}||_op ||C||_op^{1/2} delta_C``; infinite for singular ``C``."""
    return _d1_from(covariance_matrix(F), delta_C(F))


@dataclass(frozen=True)
class PairEstimate:
    case: str  # "p=q" or "p<q"
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-10) + 1e-12


def pair_estimate_check(f: SymmetricKernel, g: SymmetricKernel) -> PairEstimate:
    """Evaluate both sides of the pair-term estimate for ``I_p(f), I_q(g)``.

    The left side is computed exactly from chaos expansions, the right side
    from plain contraction norms. Arguments are swapped when ``p > q``.
    """
    if f.order > g.order:
        f, g = g, f
    p, q = f.order, g.order
    if p < 1:
        raise ValueError("orders must be >= 1")
    scaled = pairing(f, ChaosExpansion.pure(g))  # <DF, DG> / q
    if p == q:
        alpha = factorial(p) * inner(f, g)
        lhs = (ChaosExpansion.constant(f.dim, alpha) - scaled).l2_norm_sq()
        rhs = 0.0
        for r in range(1, p):
            rhs += (p ** 2 / 2 * factorial(r - 1) ** 2 * comb(p - 1, r - 1) ** 4
                    * factorial(2 * p - 2 * r)
                    * (contraction_norm_sq(f, f, p - r) + contraction_norm_sq(g, g, p - r)))
        return PairEstimate("p=q", lhs, rhs)
    lhs = scaled.l2_norm_sq()
    rhs = (factorial(p) ** 2 * comb(q - 1, p - 1) ** 2 * factorial(q - p) * norm_sq(f)
           * math.sqrt(contraction_norm_sq(g, g, q - p)))
    for r in range(1, p):
        rhs += (p ** 2 / 2 * factorial(r - 1) ** 2 * comb(p - 1, r - 1) ** 2
                * comb(q - 1, r - 1) ** 2 * factorial(p + q - 2 * r)
                * (contraction_norm_sq(f, f, p - r) + contraction_norm_sq(g, g, q - r)))
    return PairEstimate("p<q", lhs, rhs)


@dataclass(frozen=True)
class MajorantResult:
    """Pair terms against their fourth-cumulant majorant.

    For ``p = q`` only ``lhs_q`` is meaningful (and equals ``lhs_p``).
    """

    case: str
    lhs_p: float  # E[(alpha - <DF, DG>/p)^2]
    lhs_q: float  # E[(alpha - <DF, DG>/q)^2]
    rhs: float

    @property
    def holds(self) -> bool:
        tol = self.rhs * 1e-10 + 1e-12
        return self.lhs_p <= self.rhs + tol and self.lhs_q <= self.rhs + tol


def cumulant_majorant_check(f: SymmetricKernel, g: SymmetricKernel) -> MajorantResult:
    """Compare pair terms with the bound expressed through fourth cumulants."""
    if f.order > g.order:
        f, g = g, f
    p, q = f.order, g.order
    chi_f = fourth_cumulant_closed(f)
    chi_g = fourth_cumulant_closed(g)
    scaled = pairing(f, ChaosExpansion.pure(g))  # <DF, DG> / q
    if p == q:
        alpha = factorial(p) * inner(f, g)
        lhs = (ChaosExpansion.constant(f.dim, alpha) - scaled).l2_norm_sq()
        rhs = 0.5 * (chi_f + chi_g) * sum(comb(2 * r, r) for r in range(1, p))
        return MajorantResult("p=q", lhs, lhs, rhs)
    lhs_q = scaled.l2_norm_sq()
    lhs_p = (q / p) ** 2 * lhs_q
    var_f = factorial(p) * norm_sq(f)
    var_g = factorial(q) * norm_sq(g)
    rhs = var_f * math.sqrt(max(chi_g, 0.0)) + var_g * math.sqrt(max(chi_f, 0.0))
    for r in range(1, p):
        rhs += 0.5 * factorial(p + q - 2 * r) * (comb(q, r) ** 2 * chi_f + comb(p, r) ** 2 * chi_g)
    return MajorantResult("p<q", lhs_p, lhs_q, rhs)


@dataclass(frozen=True)
class BoundReport:
    delta_C: float
    psi: float
    d2_bound: float
    d1_bound: float
    covariance: np.ndarray = field(repr=False)
    fourth_cumulants: tuple[float, ...]

    @property
    def delta_le_psi(self) -> bool:
        return self.delta_C <= self.psi * (1 + 1e-10) + 1e-12


def bound_report(F: ChaosVector) -> BoundReport:
    kernels = F.kernels
    C = covariance_matrix(F)
    chi = tuple(fourth_cumulant_closed(f) for f in kernels)
    delta = delta_C(F)
    bound = psi([f.order for f in kernels], chi, list(np.diag(C)))
    return BoundReport(
        delta_C=delta,
        psi=bound,
        d2_bound=delta / 2.0,
        d1_bound=_d1_from(C, delta),
        covariance=C,
        fourth_cumulants=chi,
    )
