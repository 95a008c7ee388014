"""Seeded random kernels and pure chaos vectors for property checks."""
from __future__ import annotations

import math

import numpy as np

from .chaos_algebra import ChaosVector
from .tensor_core import GeneralTensor, SymmetricKernel, norm_sq, symmetrize

__all__ = ["random_kernel", "random_multi_index", "random_pure_vector"]


def random_kernel(rng: np.random.Generator, dim: int, order: int,
                  unit_variance: bool = True) -> SymmetricKernel:
    """Symmetrized Gaussian tensor; scaled so that ``E[I_q(f)^2] = 1`` by default."""
    f = symmetrize(GeneralTensor(dim, order, rng.standard_normal((dim,) * order)))
    if unit_variance and order > 0:
        f = f.scale(1.0 / math.sqrt(math.factorial(order) * norm_sq(f)))
    return f


def random_pure_vector(rng: np.random.Generator, max_components: int = 3, max_order: int = 3,
                       max_dim: int = 4) -> ChaosVector:
    d = int(rng.integers(1, max_components + 1))
    dim = int(rng.integers(1, max_dim + 1))
    orders = [int(rng.integers(1, max_order + 1)) for _ in range(d)]
    return ChaosVector.from_kernels([random_kernel(rng, dim, q) for q in orders])


def random_multi_index(rng: np.random.Generator, d: int, min_size: int = 3,
                       max_size: int = 4) -> tuple[int, ...]:
    size = int(rng.integers(min_size, max_size + 1))
    m = [0] * d
    for j in rng.integers(0, d, size=size):
        m[int(j)] += 1
    return tuple(m)
