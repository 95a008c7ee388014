import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from wienerchaos.chaos_algebra import ChaosVector, covariance_matrix
from wienerchaos.cumulant_engine import cumulants_from_moments
from wienerchaos.montecarlo import (
    MAX_HERMITE_ORDER,
    empirical_cumulant,
    hermite,
    sample,
    standard_normals,
)
from wienerchaos.random_instances import random_kernel
from wienerchaos.tensor_core import SymmetricKernel, contract_sym, inner

E0 = SymmetricKernel(1, 1, {(0,): 1.0})
E00 = SymmetricKernel(1, 2, {(0, 0): 1.0})


def test_hermite_small_cases():
    assert hermite(2, 2.0) == 3.0
    assert hermite(0, 1.7) == 1.0
    np.testing.assert_array_equal(hermite(0, np.array([1.0, 2.0])), [1.0, 1.0])
    with pytest.raises(ValueError):
        hermite(MAX_HERMITE_ORDER + 1, 0.0)


@pytest.mark.parametrize("q", [1, 3, 4, 7])
def test_hermite_matches_rodrigues_formula(q):
    x = sympy.Symbol("x")
    weight = sympy.exp(-x ** 2 / 2)
    rodrigues = sympy.simplify((-1) ** q * sympy.diff(weight, x, q) / weight)
    assert hermite(q, 1.5) == pytest.approx(float(rodrigues.subs(x, 1.5)), rel=1e-13)


def test_normals_are_chunk_invariant():
    whole = standard_normals(7, 0, 1000, 3)
    parts = np.vstack([standard_normals(7, a, b, 3) for a, b in [(0, 10), (10, 999), (999, 1000)]])
    assert np.array_equal(whole, parts)
    assert not np.array_equal(whole, standard_normals(8, 0, 1000, 3))


def test_normals_look_standard():
    z = standard_normals(1, 0, 200_000, 2)
    assert abs(z.mean()) < 4 / math.sqrt(z.size)
    assert abs(z.var() - 1) < 4 * math.sqrt(2 / z.size)
    assert abs(np.corrcoef(z.T)[0, 1]) < 4 / math.sqrt(z.shape[0])


def test_sample_is_deterministic_and_chunk_invariant(rng):
    F = ChaosVector.from_kernels([random_kernel(rng, 3, 2), random_kernel(rng, 3, 3)])
    a = sample(F, 5000, seed=3)
    b = sample(F, 5000, seed=3, chunk_size=777)
    assert np.array_equal(a.values, b.values)


def test_first_order_samples_are_standard_normal():
    batch = sample(ChaosVector.from_kernels([E0]), 100_000, seed=11)
    xi = standard_normals(11, 0, 100_000, 1)
    assert np.array_equal(batch.values, xi)
    assert abs(batch.values.mean()) < 4 / math.sqrt(batch.count)


def test_second_order_basis_samples():
    xi = standard_normals(5, 0, 50_000, 2)
    sq = sample(ChaosVector.from_kernels([SymmetricKernel(2, 2, {(0, 0): 1.0})]), 50_000, seed=5)
    np.testing.assert_allclose(sq.values[:, 0], xi[:, 0] ** 2 - 1, rtol=1e-13, atol=1e-13)
    # variance of a centered chi-square(1) is 2; its variance estimator has sd sqrt(56/n)
    assert abs(sq.values.var() - 2) < 4 * math.sqrt(56 / sq.count)
    cross = sample(ChaosVector.from_kernels([SymmetricKernel.basis(2, 0, 1)]), 50_000, seed=5)
    np.testing.assert_allclose(cross.values[:, 0], xi[:, 0] * xi[:, 1], rtol=1e-13, atol=1e-13)


def test_sample_mean_and_covariance_within_ci(rng):
    F = ChaosVector.from_kernels([random_kernel(rng, 2, 1), random_kernel(rng, 2, 2),
                                  random_kernel(rng, 2, 2)])
    batch = sample(F, 200_000, seed=9)
    C = covariance_matrix(F)
    assert np.all(np.abs(batch.values.mean(axis=0)) < 4 * np.sqrt(np.diag(C) / batch.count))
    for i in range(3):
        for j in range(3):
            m = tuple(int(i == k) + int(j == k) for k in range(3))
            est, err = empirical_cumulant(batch, m)
            assert abs(est - C[i, j]) <= 4 * err


def test_empirical_cumulants_of_chi_square():
    batch = sample(ChaosVector.from_kernels([E00]), 1_000_000, seed=42)
    for k, target in [(2, 2.0), (3, 8.0), (4, 48.0)]:
        est, err = empirical_cumulant(batch, (k,))
        assert abs(est - target) <= 4 * err


def test_empirical_variance_of_gaussian():
    batch = sample(ChaosVector.from_kernels([E0]), 1_000_000, seed=42)
    est, err = empirical_cumulant(batch, (2,))
    assert abs(est - 1.0) <= 4 * err


def test_empirical_mixed_third_cumulant(rng):
    f, g = random_kernel(rng, 2, 1), random_kernel(rng, 2, 2)
    F = ChaosVector.from_kernels([f, g])
    target = 2 * inner(contract_sym(f, f, 0), g)
    assert cumulants_from_moments(F, (2, 1)) == pytest.approx(target, rel=1e-12)
    est, err = empirical_cumulant(sample(F, 1_000_000, seed=42), (2, 1))
    assert abs(est - target) <= 4 * err


def test_empirical_cumulant_limits():
    batch = sample(ChaosVector.from_kernels([E0]), 31, seed=1)
    with pytest.raises(ValueError):
        empirical_cumulant(batch, (2,))
    batch = sample(ChaosVector.from_kernels([E0]), 64, seed=1)
    with pytest.raises(ValueError):
        empirical_cumulant(batch, (7,))
