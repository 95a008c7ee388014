"""Symmetric kernels over a finite orthonormal basis and their contractions.

A :class:`SymmetricKernel` of order ``q`` over ``dim`` basis vectors stores one
value per sorted index tuple (the canonical representative of its permutation
class). The value is the value of the underlying symmetric function at *any*
arrangement of that tuple, so inner products have to weight each stored entry
by the number of distinct arrangements.

Contractions are computed on dense arrays (:class:`GeneralTensor`), which is
cheap at the sizes this library targets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "DenseLimitExceeded",
    "GeneralTensor",
    "SymmetricKernel",
    "contract",
    "contract_sym",
    "contraction_norm_sq",
    "inner",
    "norm_sq",
    "symmetrize",
]

#: Upper bound on ``dim**order`` for any dense intermediate.
MAX_DENSE_ENTRIES = 1 << 24


class DenseLimitExceeded(ValueError):
    """A dense intermediate would exceed :data:`MAX_DENSE_ENTRIES`."""


@dataclass(frozen=True)
class _IndexTable:
    sorted_tuples: tuple[tuple[int, ...], ...]
    # position in ``sorted_tuples`` of sorted(t) for every full tuple t, C order
    class_of_flat: np.ndarray
    # number of distinct arrangements of each sorted tuple
    multiplicity: np.ndarray
    # flat C-order offset of each sorted tuple
    flat_of_sorted: np.ndarray


@lru_cache(maxsize=256)
def _index_table(dim: int, order: int) -> _IndexTable:
    if dim ** order > MAX_DENSE_ENTRIES:
        raise DenseLimitExceeded(
            f"dense tensor with dim={dim}, order={order} has {dim ** order} entries"
        )
    sorted_tuples = tuple(itertools.combinations_with_replacement(range(dim), order))
    position = {t: i for i, t in enumerate(sorted_tuples)}
    if order == 0:
        class_of_flat = np.zeros(1, dtype=np.int64)
    elif (order + 1) ** dim < 2 ** 62:
        # code a tuple by its digit counts in base order+1, built one axis at a time
        digit_code = (order + 1) ** np.arange(dim, dtype=np.int64)
        codes = np.zeros(1, dtype=np.int64)
        for _ in range(order):
            codes = (codes[:, None] + digit_code[None, :]).reshape(-1)
        class_codes = np.array(
            [sum(int(digit_code[k]) for k in t) for t in sorted_tuples], dtype=np.int64
        )
        perm = np.argsort(class_codes)
        class_of_flat = perm[np.searchsorted(class_codes[perm], codes)]
    else:
        # wide bases: sort the digits of every flat index
        grid = np.indices((dim,) * order).reshape(order, -1).T
        keys = np.sort(grid, axis=1)
        weights = dim ** np.arange(order - 1, -1, -1, dtype=np.int64)
        code_to_class = np.empty(dim ** order, dtype=np.int64)
        for t, i in position.items():
            code_to_class[int(np.dot(t, weights))] = i
        class_of_flat = code_to_class[keys @ weights]
    multiplicity = np.bincount(class_of_flat, minlength=len(sorted_tuples)).astype(float)
    flat_of_sorted = np.array(
        [int(np.ravel_multi_index(t, (dim,) * order)) if order else 0 for t in sorted_tuples],
        dtype=np.int64,
    )
    for arr in (class_of_flat, multiplicity, flat_of_sorted):
        arr.setflags(write=False)
    return _IndexTable(sorted_tuples, class_of_flat, multiplicity, flat_of_sorted)


class SymmetricKernel:
    """Element of the ``order``-fold symmetric tensor power of R^dim.

    Parameters
    ----------
    dim : int
        Size of the orthonormal basis.
    order : int
        Tensor order; 0 means a scalar stored under the empty tuple.
    coeffs : mapping, optional
        Sorted (non-decreasing) index tuple -> value. Missing keys are zero.

    Instances are immutable.
    """

    __slots__ = ("_dim", "_order", "_values", "_dense")

    def __init__(self, dim: int, order: int, coeffs: Mapping[tuple[int, ...], float] | None = None):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        if order < 0:
            raise ValueError(f"order must be non-negative, got {order}")
        table = _index_table(dim, order)
        values = np.zeros(len(table.sorted_tuples))
        position = {t: i for i, t in enumerate(table.sorted_tuples)}
        for key, value in (coeffs or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != order:
                raise ValueError(f"index {key} has length {len(key)}, expected {order}")
            if any(a > b for a, b in zip(key, key[1:])):
                raise ValueError(f"index {key} is not sorted")
            if any(k < 0 or k >= dim for k in key):
                raise ValueError(f"index {key} out of range for dim={dim}")
            if not math.isfinite(value):
                raise ValueError(f"non-finite value at {key}")
            values[position[key]] = float(value)
        self._init(dim, order, values)

    def _init(self, dim: int, order: int, values: np.ndarray) -> None:
        values.setflags(write=False)
        self._dim = dim
        self._order = order
        self._values = values
        self._dense = None

    @classmethod
    def _from_values(cls, dim: int, order: int, values: np.ndarray) -> "SymmetricKernel":
        obj = cls.__new__(cls)
        obj._init(dim, order, np.array(values, dtype=float))
        return obj

    @classmethod
    def from_dense(cls, array: np.ndarray) -> "SymmetricKernel":
        """Read a kernel off an already-symmetric dense array (no averaging)."""
        array = np.asarray(array, dtype=float)
        order = array.ndim
        dim = array.shape[0] if order else 1
        if array.shape != (dim,) * order:
            raise ValueError(f"array shape {array.shape} is not cubic")
        table = _index_table(dim, order)
        return cls._from_values(dim, order, array.reshape(-1)[table.flat_of_sorted])

    @classmethod
    def scalar(cls, dim: int, value: float) -> "SymmetricKernel":
        return cls(dim, 0, {(): value})

    @classmethod
    def basis(cls, dim: int, *indices: int) -> "SymmetricKernel":
        """Symmetrization of ``e_{i_1} ⊗ ... ⊗ e_{i_q}``."""
        order = len(indices)
        table = _index_table(dim, order)
        key = tuple(sorted(indices))
        mult = table.multiplicity[table.sorted_tuples.index(key)]
        return cls(dim, order, {key: 1.0 / mult})

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def order(self) -> int:
        return self._order

    @property
    def values(self) -> np.ndarray:
        """Values aligned with :meth:`sorted_tuples` (read-only)."""
        return self._values

    def sorted_tuples(self) -> tuple[tuple[int, ...], ...]:
        return _index_table(self._dim, self._order).sorted_tuples

    @property
    def coeffs(self) -> Mapping[tuple[int, ...], float]:
        tuples = self.sorted_tuples()
        return MappingProxyType(
            {tuples[i]: float(v) for i, v in enumerate(self._values) if v != 0.0}
        )

    def multiplicities(self) -> np.ndarray:
        return _index_table(self._dim, self._order).multiplicity

    def is_zero(self) -> bool:
        return not np.any(self._values)

    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            table = _index_table(self._dim, self._order)
            dense = self._values[table.class_of_flat].reshape((self._dim,) * self._order)
            dense.setflags(write=False)
            self._dense = dense
        return self._dense

    def __getitem__(self, index: Iterable[int]) -> float:
        key = tuple(sorted(index))
        tuples = self.sorted_tuples()
        return float(self._values[tuples.index(key)])

    def scale(self, factor: float) -> "SymmetricKernel":
        return SymmetricKernel._from_values(self._dim, self._order, self._values * factor)

    def __add__(self, other: "SymmetricKernel") -> "SymmetricKernel":
        _check_same_shape(self, other)
        return SymmetricKernel._from_values(self._dim, self._order, self._values + other._values)

    def __sub__(self, other: "SymmetricKernel") -> "SymmetricKernel":
        return self + other.scale(-1.0)

    def __neg__(self) -> "SymmetricKernel":
        return self.scale(-1.0)

    def __mul__(self, factor: float) -> "SymmetricKernel":
        return self.scale(factor)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymmetricKernel):
            return NotImplemented
        return (
            self._dim == other._dim
            and self._order == other._order
            and np.array_equal(self._values, other._values)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SymmetricKernel(dim={self._dim}, order={self._order}, coeffs={dict(self.coeffs)})"


@dataclass(frozen=True, eq=False)
class GeneralTensor:
    """Dense, not necessarily symmetric tensor of shape ``(dim,) * order``."""

    dim: int
    order: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.dim,) * self.order:
            raise ValueError(
                f"values shape {values.shape} does not match dim={self.dim}, order={self.order}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("tensor has non-finite entries")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_kernel(cls, f: SymmetricKernel) -> "GeneralTensor":
        return cls(f.dim, f.order, f.to_dense())

    def norm_sq(self) -> float:
        return float(np.sum(self.values * self.values))


def _check_same_shape(f: SymmetricKernel, g: SymmetricKernel) -> None:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} != {g.dim}")
    if f.order != g.order:
        raise ValueError(f"order mismatch: {f.order} != {g.order}")


def _contract_dense(a: np.ndarray, b: np.ndarray, r: int) -> np.ndarray:
    if r == 0:
        return np.multiply.outer(a, b)
    p, q = a.ndim, b.ndim
    return np.tensordot(a, b, axes=(list(range(p - r, p)), list(range(q - r, q))))


def contract(f: SymmetricKernel, g: SymmetricKernel, r: int) -> GeneralTensor:
    """Contraction of order ``r``: pair the last ``r`` slots of ``f`` and ``g``.

    The result at ``(s_1..s_{p-r}, t_1..t_{q-r})`` is the sum over ``u`` of
    ``f(s, u) * g(t, u)``.
    """
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} != {g.dim}")
    if not 0 <= r <= min(f.order, g.order):
        raise ValueError(f"contraction order {r} outside 0..{min(f.order, g.order)}")
    order = f.order + g.order - 2 * r
    if f.dim ** order > MAX_DENSE_ENTRIES:
        raise DenseLimitExceeded(f"contraction result of order {order} is too large")
    return GeneralTensor(f.dim, order, _contract_dense(f.to_dense(), g.to_dense(), r))


def symmetrize(t: GeneralTensor) -> SymmetricKernel:
    """Average ``t`` over all permutations of its slots."""
    table = _index_table(t.dim, t.order)
    sums = np.bincount(table.class_of_flat, weights=t.values.reshape(-1),
                       minlength=len(table.sorted_tuples))
    return SymmetricKernel._from_values(t.dim, t.order, sums / table.multiplicity)


def contract_sym(f: SymmetricKernel, g: SymmetricKernel, r: int) -> SymmetricKernel:
    """Symmetrized contraction, the kernel appearing in the product formula."""
    return symmetrize(contract(f, g, r))


def inner(f: SymmetricKernel, g: SymmetricKernel) -> float:
    """Inner product in the full tensor power (sum over all ordered tuples)."""
    _check_same_shape(f, g)
    return float(np.sum(f.multiplicities() * f.values * g.values))


def norm_sq(f: SymmetricKernel) -> float:
    return inner(f, f)


def contraction_norm_sq(f: SymmetricKernel, g: SymmetricKernel, r: int,
                        method: str = "dense") -> float:
    """Squared norm of the (unsymmetrized) contraction ``f ⊗_r g``.

    ``method="dense"`` builds the contraction; ``method="gram"`` uses
    ``<f ⊗_{p-r} f, g ⊗_{q-r} g>`` and never forms ``f ⊗_r g``.
    """
    if method == "dense":
        return contract(f, g, r).norm_sq()
    if method == "gram":
        # validates dim and r before the partial contractions below
        if f.dim != g.dim:
            raise ValueError(f"dimension mismatch: {f.dim} != {g.dim}")
        if not 0 <= r <= min(f.order, g.order):
            raise ValueError(f"contraction order {r} outside 0..{min(f.order, g.order)}")
        ff = contract(f, f, f.order - r).values
        gg = contract(g, g, g.order - r).values
        return float(np.sum(ff * gg))
    raise ValueError(f"unknown method {method!r}")
