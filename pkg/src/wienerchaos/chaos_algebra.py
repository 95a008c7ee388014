"""Finite chaos expansions, their products, expectations and covariances."""
from __future__ import annotations

from math import comb, factorial
from typing import Iterable, Mapping, Sequence

import numpy as np

from .tensor_core import SymmetricKernel, contract_sym, contraction_norm_sq, inner, norm_sq

__all__ = [
    "DEFAULT_ORDER_CAP",
    "ChaosExpansion",
    "ChaosVector",
    "OrderCapExceeded",
    "covariance_matrix",
    "expectation",
    "expectation_of_product",
    "fourth_cumulant_closed",
    "moment",
    "product",
]

DEFAULT_ORDER_CAP = 16


class OrderCapExceeded(ValueError):
    """An intermediate chaos order went past the configured cap."""


class ChaosExpansion:
    """A finite sum ``sum_q I_q(f_q)``; the order-0 term is the mean.

    Zero kernels are dropped on construction (exact zeros only).
    """

    __slots__ = ("_dim", "_terms")

    def __init__(self, dim: int, terms: Mapping[int, SymmetricKernel] | None = None):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        kept = {}
        for q, kernel in sorted((terms or {}).items()):
            if kernel.dim != dim:
                raise ValueError(f"kernel of order {q} has dim {kernel.dim}, expected {dim}")
            if kernel.order != q:
                raise ValueError(f"kernel stored under order {q} has order {kernel.order}")
            if not kernel.is_zero():
                kept[q] = kernel
        self._dim = dim
        self._terms = kept

    @classmethod
    def constant(cls, dim: int, value: float) -> "ChaosExpansion":
        return cls(dim, {0: SymmetricKernel.scalar(dim, value)})

    @classmethod
    def pure(cls, kernel: SymmetricKernel) -> "ChaosExpansion":
        return cls(kernel.dim, {kernel.order: kernel})

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def terms(self) -> Mapping[int, SymmetricKernel]:
        return dict(self._terms)

    def orders(self) -> list[int]:
        return list(self._terms)

    def max_order(self) -> int:
        return max(self._terms, default=0)

    def kernel(self, q: int) -> SymmetricKernel:
        """Kernel of order ``q`` (a zero kernel when absent)."""
        return self._terms.get(q, SymmetricKernel(self._dim, q))

    def l2_norm_sq(self) -> float:
        """``E[F^2]`` by the isometry."""
        return sum(factorial(q) * norm_sq(f) for q, f in self._terms.items())

    def scale(self, factor: float) -> "ChaosExpansion":
        return ChaosExpansion(self._dim, {q: f.scale(factor) for q, f in self._terms.items()})

    def __add__(self, other: "ChaosExpansion") -> "ChaosExpansion":
        if other.dim != self._dim:
            raise ValueError(f"dimension mismatch: {self._dim} != {other.dim}")
        terms = dict(self._terms)
        for q, g in other._terms.items():
            terms[q] = terms[q] + g if q in terms else g
        return ChaosExpansion(self._dim, terms)

    def __sub__(self, other: "ChaosExpansion") -> "ChaosExpansion":
        return self + other.scale(-1.0)

    def __mul__(self, other):
        if isinstance(other, ChaosExpansion):
            return product(self, other)
        return self.scale(float(other))

    def __rmul__(self, factor: float) -> "ChaosExpansion":
        return self.scale(float(factor))

    def __repr__(self) -> str:
        return f"ChaosExpansion(dim={self._dim}, orders={self.orders()})"


def _accumulate(dim: int, pieces: Iterable[tuple[int, SymmetricKernel]]) -> ChaosExpansion:
    acc: dict[int, np.ndarray] = {}
    for q, kernel in pieces:
        if q in acc:
            acc[q] = acc[q] + kernel.values
        else:
            acc[q] = kernel.values.copy()
    return ChaosExpansion(dim, {q: SymmetricKernel._from_values(dim, q, v) for q, v in acc.items()})


def product(F: ChaosExpansion, G: ChaosExpansion,
            order_cap: int = DEFAULT_ORDER_CAP) -> ChaosExpansion:
    """Exact chaos expansion of the pointwise product ``F * G``.

    Each pair of kernels ``(f, g)`` of orders ``(p, q)`` contributes
    ``sum_r r! C(p, r) C(q, r) I_{p+q-2r}(f ~⊗_r g)``.
    """
    if F.dim != G.dim:
        raise ValueError(f"dimension mismatch: {F.dim} != {G.dim}")
    if F.max_order() + G.max_order() > order_cap:
        raise OrderCapExceeded(
            f"product reaches order {F.max_order() + G.max_order()} > cap {order_cap}"
        )

    def pieces():
        for p, f in F.terms.items():
            for q, g in G.terms.items():
                for r in range(min(p, q) + 1):
                    coef = factorial(r) * comb(p, r) * comb(q, r)
                    yield p + q - 2 * r, contract_sym(f, g, r).scale(coef)

    return _accumulate(F.dim, pieces())


def expectation(F: ChaosExpansion) -> float:
    if 0 in F.terms:
        return float(F.terms[0].values[0])
    return 0.0


def expectation_of_product(F: ChaosExpansion, G: ChaosExpansion) -> float:
    """``E[F G]``: only the fully contracted (order-0) terms of the product survive."""
    if F.dim != G.dim:
        raise ValueError(f"dimension mismatch: {F.dim} != {G.dim}")
    G_terms = G.terms
    return sum(
        factorial(q) * inner(f, G_terms[q]) for q, f in F.terms.items() if q in G_terms
    )


class ChaosVector:
    """A d-tuple of chaos expansions over a shared basis.

    A vector built with :meth:`from_kernels` (or whose components each hold a
    single term of order >= 1) is *pure*; :attr:`kernels` and :attr:`orders`
    are then available.
    """

    __slots__ = ("_components", "_kernels")

    def __init__(self, components: Sequence[ChaosExpansion],
                 kernels: Sequence[SymmetricKernel] | None = None):
        components = tuple(components)
        if not components:
            raise ValueError("a chaos vector needs at least one component")
        dims = {c.dim for c in components}
        if len(dims) != 1:
            raise ValueError(f"components have different dims: {sorted(dims)}")
        if kernels is None:
            inferred = []
            for c in components:
                terms = c.terms
                if len(terms) != 1 or 0 in terms:
                    inferred = None
                    break
                inferred.append(next(iter(terms.values())))
            kernels = inferred
        self._components = components
        self._kernels = tuple(kernels) if kernels is not None else None

    @classmethod
    def from_kernels(cls, kernels: Sequence[SymmetricKernel]) -> "ChaosVector":
        kernels = tuple(kernels)
        for f in kernels:
            if f.order < 1:
                raise ValueError("pure components need order >= 1")
        return cls([ChaosExpansion.pure(f) for f in kernels], kernels)

    @property
    def components(self) -> tuple[ChaosExpansion, ...]:
        return self._components

    @property
    def dim(self) -> int:
        return self._components[0].dim

    def __len__(self) -> int:
        return len(self._components)

    @property
    def is_pure(self) -> bool:
        return self._kernels is not None

    @property
    def kernels(self) -> tuple[SymmetricKernel, ...]:
        if self._kernels is None:
            raise ValueError("chaos vector has non-pure components")
        return self._kernels

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(f.order for f in self.kernels)


def covariance_matrix(F: ChaosVector) -> np.ndarray:
    """``C_ij = q! <f_i, f_j>`` for equal orders and 0 otherwise."""
    kernels = F.kernels
    d = len(kernels)
    C = np.zeros((d, d))
    for i in range(d):
        for j in range(i, d):
            if kernels[i].order == kernels[j].order:
                C[i, j] = C[j, i] = factorial(kernels[i].order) * inner(kernels[i], kernels[j])
    return C


def fourth_cumulant_closed(f: SymmetricKernel) -> float:
    """``E[F^4] - 3 E[F^2]^2`` for ``F = I_p(f)`` through contraction norms."""
    p = f.order
    if p < 1:
        raise ValueError("fourth cumulant formula needs order >= 1")
    total = 0.0
    for r in range(1, p):
        plain = contraction_norm_sq(f, f, r)
        symmetric = norm_sq(contract_sym(f, f, r))
        total += factorial(p) ** 2 * comb(p, r) ** 2 * (
            plain + comb(2 * p - 2 * r, p - r) * symmetric
        )
    return total


def _product_chain(factors: Sequence[ChaosExpansion], dim: int, order_cap: int) -> ChaosExpansion:
    acc = ChaosExpansion.constant(dim, 1.0)
    for factor in factors:
        acc = product(acc, factor, order_cap)
    return acc


def moment(F: ChaosVector, m: Sequence[int], order_cap: int = DEFAULT_ORDER_CAP) -> float:
    """``E[prod_i F_i^{m_i}]`` by exact chaos multiplication.

    The factors are split into two halves; each half is multiplied out and the
    expectation of the final product is read from its order-0 term.
    """
    if len(m) != len(F):
        raise ValueError(f"multi-index of length {len(m)} for a vector of length {len(F)}")
    if any(k < 0 for k in m):
        raise ValueError("multi-index entries must be non-negative")
    factors = [F.components[i] for i, k in enumerate(m) for _ in range(k)]
    if not factors:
        return 1.0
    half = len(factors) // 2
    left = _product_chain(factors[:half], F.dim, order_cap)
    right = _product_chain(factors[half:], F.dim, order_cap)
    return expectation_of_product(left, right)
