"""Exact simulation of pure chaos vectors and empirical cumulants.

Standard normals come from a counter-based generator: the 64-bit words for
sample ``i`` are a SplitMix64 hash of ``(seed, i, word index)``, turned into
normals with Box-Muller. Any sample can therefore be regenerated on its own,
and splitting the index range into chunks never changes the output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial
from typing import Sequence

import numpy as np

from .chaos_algebra import ChaosVector
from .multiindex import check_multi_index, cumulant_from_moments, decompose

__all__ = [
    "MAX_HERMITE_ORDER",
    "SampleBatch",
    "empirical_cumulant",
    "hermite",
    "sample",
    "standard_normals",
]

MAX_HERMITE_ORDER = 32
N_BATCHES = 32
DEFAULT_CHUNK = 1 << 16

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    z = x + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _uniform_words(seed: int, start: int, stop: int, n_words: int) -> np.ndarray:
    """Uniforms in (0, 1], shape ``(stop - start, n_words)``."""
    with np.errstate(over="ignore"):
        key = _splitmix64(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))[0]
        idx = np.arange(start, stop, dtype=np.uint64)
        stream = _splitmix64(key ^ (idx * _GOLDEN))
        words = _splitmix64(stream[:, None] + np.arange(n_words, dtype=np.uint64)[None, :] * _MIX1)
    return ((words >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53


def standard_normals(seed: int, start: int, stop: int, dim: int) -> np.ndarray:
    """Independent N(0, 1) draws for samples ``start..stop-1``, shape ``(stop - start, dim)``."""
    n_pairs = (dim + 1) // 2
    u = _uniform_words(seed, start, stop, 2 * n_pairs)
    radius = np.sqrt(-2.0 * np.log(u[:, 0::2]))
    angle = 2.0 * math.pi * u[:, 1::2]
    z = np.empty((stop - start, 2 * n_pairs))
    z[:, 0::2] = radius * np.cos(angle)
    z[:, 1::2] = radius * np.sin(angle)
    return z[:, :dim]


def hermite(q: int, x):
    """Probabilists' Hermite polynomial ``H_q`` evaluated at ``x`` (scalar or array)."""
    if q < 0 or q > MAX_HERMITE_ORDER:
        raise ValueError(f"Hermite order must be in 0..{MAX_HERMITE_ORDER}, got {q}")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if q == 0:
        return prev if prev.ndim else float(prev)
    for k in range(1, q):
        prev, cur = cur, x * cur - k * prev
    return cur if cur.ndim else float(cur)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    seed: int
    count: int
    values: np.ndarray  # (count, d)


def _evaluate(F: ChaosVector, xi: np.ndarray) -> np.ndarray:
    kernels = F.kernels
    top = max(f.order for f in kernels)
    # H[a][:, k] = H_a(xi_k)
    H = [hermite(a, xi) for a in range(top + 1)]
    out = np.zeros((xi.shape[0], len(kernels)))
    for col, f in enumerate(kernels):
        q = f.order
        for idx, value in zip(f.sorted_tuples(), f.values):
            if value == 0.0:
                continue
            counts: dict[int, int] = {}
            for k in idx:
                counts[k] = counts.get(k, 0) + 1
            weight = value * factorial(q)
            term = np.full(xi.shape[0], weight)
            for k, a in counts.items():
                term = term * (H[a][:, k] / factorial(a))
            out[:, col] += term
    return out


def sample(F: ChaosVector, count: int, seed: int, chunk_size: int = DEFAULT_CHUNK) -> SampleBatch:
    """Draw ``count`` realizations of a pure chaos vector.

    On the basis, ``I_q`` of the symmetrized ``e_1^{a_1} ⊗ ... ⊗ e_n^{a_n}``
    equals ``prod_k H_{a_k}(xi_k)`` (times ``q! / prod a_k!`` for the stored
    canonical value), with ``xi`` i.i.d. standard normal.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    values = np.empty((count, len(F)))
    for start in range(0, count, chunk_size):
        stop = min(start + chunk_size, count)
        values[start:stop] = _evaluate(F, standard_normals(seed, start, stop, F.dim))
    values.setflags(write=False)
    return SampleBatch(seed, count, values)


def _plugin_cumulant(values: np.ndarray, labels: tuple[int, ...]) -> float:
    def moment_of(key: tuple[int, ...]) -> float:
        prod = np.ones(values.shape[0])
        for j in key:
            prod = prod * values[:, j]
        return float(prod.mean())

    return cumulant_from_moments(labels, moment_of)


def empirical_cumulant(batch: SampleBatch, m: Sequence[int]) -> tuple[float, float]:
    """Plug-in joint cumulant and its batch-means standard error (32 batches)."""
    m = check_multi_index(m, batch.values.shape[1])
    if sum(m) > 6:
        raise ValueError("empirical cumulants are limited to |m| <= 6")
    if batch.count < N_BATCHES:
        raise ValueError(f"need at least {N_BATCHES} samples, got {batch.count}")
    labels = decompose(m)
    estimate = _plugin_cumulant(batch.values, labels)
    per_batch = [_plugin_cumulant(chunk, labels)
                 for chunk in np.array_split(batch.values, N_BATCHES)]
    stderr = float(np.std(per_batch, ddof=1) / math.sqrt(N_BATCHES))
    return estimate, stderr
