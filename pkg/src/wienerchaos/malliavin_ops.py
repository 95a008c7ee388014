"""Malliavin operators on finite chaos expansions and the iterated Gamma functionals.

On a pure integral ``I_p(f)`` the derivative is ``D I_p(f) = p I_{p-1}(f(., t))``
and ``-D L^{-1} I_Q(g) = I_{Q-1}(g(., t))``; constants are annihilated by
``L^{-1}``. Pairing the two with the product formula gives :func:`pairing`.
"""
from __future__ import annotations

from math import comb, factorial
from typing import Sequence

from .chaos_algebra import ChaosExpansion, ChaosVector, _accumulate, expectation
from .multiindex import check_multi_index, decompose, orderings
from .tensor_core import SymmetricKernel, contract_sym

__all__ = [
    "derivative_pairing",
    "gamma",
    "gamma_expectations",
    "cumulant_via_gamma",
    "ornstein_uhlenbeck",
    "pseudo_inverse",
    "pairing",
]


def ornstein_uhlenbeck(F: ChaosExpansion) -> ChaosExpansion:
    """``L F``: multiply the order-q term by ``-q``."""
    return ChaosExpansion(F.dim, {q: f.scale(-q) for q, f in F.terms.items()})


def pseudo_inverse(F: ChaosExpansion) -> ChaosExpansion:
    """``L^{-1} F``: multiply the order-q term by ``-1/q``; drops the mean."""
    return ChaosExpansion(F.dim, {q: f.scale(-1.0 / q) for q, f in F.terms.items() if q > 0})


def pairing(f: SymmetricKernel, G: ChaosExpansion) -> ChaosExpansion:
    """Chaos expansion of ``<D I_p(f), -D L^{-1} G>``.

    An order-Q kernel ``g`` of ``G`` contributes
    ``p * sum_{r=1}^{min(p,Q)} (r-1)! C(p-1, r-1) C(Q-1, r-1) I_{p+Q-2r}(f ~⊗_r g)``.
    """
    if f.dim != G.dim:
        raise ValueError(f"dimension mismatch: {f.dim} != {G.dim}")
    p = f.order
    if p < 1:
        raise ValueError("pairing needs a kernel of order >= 1")

    def pieces():
        for Q, g in G.terms.items():
            if Q == 0:
                continue
            for r in range(1, min(p, Q) + 1):
                coef = p * factorial(r - 1) * comb(p - 1, r - 1) * comb(Q - 1, r - 1)
                yield p + Q - 2 * r, contract_sym(f, g, r).scale(coef)

    return _accumulate(f.dim, pieces())


def derivative_pairing(f: SymmetricKernel, g: SymmetricKernel) -> ChaosExpansion:
    """``<D I_p(f), D I_q(g)>`` as a chaos expansion (equals ``q`` times the pairing)."""
    return pairing(f, ChaosExpansion.pure(g)).scale(g.order)


def gamma(F: ChaosVector, path: Sequence[int]) -> ChaosExpansion:
    """``Gamma_{l_1..l_k}(F)`` for component indices ``path = (l_1, ..., l_k)``."""
    kernels = F.kernels
    path = tuple(path)
    if not path:
        raise ValueError("gamma path must be nonempty")
    for j in path:
        if not 0 <= j < len(kernels):
            raise ValueError(f"component index {j} out of range")
    acc = ChaosExpansion.pure(kernels[path[0]])
    for j in path[1:]:
        acc = pairing(kernels[j], acc)
    return acc


def gamma_expectations(F: ChaosVector, m: Sequence[int]) -> dict[tuple[int, ...], float]:
    """``E[Gamma]`` for every distinct ordering of the decomposition of ``m``."""
    m = check_multi_index(m, len(F))
    return {path: expectation(gamma(F, path)) for path in orderings(m)}


def cumulant_via_gamma(F: ChaosVector, m: Sequence[int],
                       path: Sequence[int] | None = None) -> float:
    """Joint cumulant ``kappa_m(F)`` as ``(|m|-1)! E[Gamma]``.

    With ``path`` given, only that ordering is used. Without it, ``E[Gamma]``
    is averaged over all distinct orderings of the decomposition of ``m``;
    single orderings are not interchangeable when components have different
    orders.
    """
    m = check_multi_index(m, len(F))
    scale = factorial(sum(m) - 1)
    if path is not None:
        path = tuple(path)
        if sorted(path) != list(decompose(m)):
            raise ValueError(f"path {path} does not decompose multi-index {m}")
        return scale * expectation(gamma(F, path))
    values = gamma_expectations(F, m)
    return scale * sum(values.values()) / len(values)
