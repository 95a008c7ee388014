import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from wienerchaos.tensor_core import SymmetricKernel


def naive_dense(f: SymmetricKernel) -> np.ndarray:
    """Dense array built entry by entry from the sorted-tuple lookup."""
    out = np.zeros((f.dim,) * f.order)
    for idx in itertools.product(range(f.dim), repeat=f.order):
        out[idx] = f[idx]
    return out


def kernel_from_seed(seed: int, dim: int, order: int) -> SymmetricKernel:
    rng = np.random.default_rng(seed)
    from wienerchaos.random_instances import random_kernel
    return random_kernel(rng, dim, order)


seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
