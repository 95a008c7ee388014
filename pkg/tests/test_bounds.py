import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wienerchaos.bounds import (
    bound_report,
    contraction_expansion_norm,
    cumulant_majorant_check,
    d1_bound,
    d2_bound,
    delta_C,
    delta_pair_terms,
    expansion_pair_terms,
    jacobi_eigenvalues,
    opnorm,
    pair_estimate_check,
    psi,
)
from wienerchaos.chaos_algebra import ChaosVector, fourth_cumulant_closed
from wienerchaos.random_instances import random_kernel, random_pure_vector
from wienerchaos.tensor_core import SymmetricKernel, contract_sym, norm_sq

from conftest import seeds

E0 = SymmetricKernel(1, 1, {(0,): 1.0})
E00 = SymmetricKernel(1, 2, {(0, 0): 1.0})


def demo_kernel(n):
    return SymmetricKernel(n, 2, {(k, k): 1.0 / math.sqrt(n) for k in range(n)})


def test_delta_examples():
    assert delta_C(ChaosVector.from_kernels([E0])) == 0.0
    assert delta_C(ChaosVector.from_kernels([E00])) == pytest.approx(math.sqrt(8), rel=1e-14)
    for n in (1, 3, 7):
        assert delta_C(ChaosVector.from_kernels([demo_kernel(n)])) == pytest.approx(
            math.sqrt(8 / n), rel=1e-12)


def test_delta_vanishes_for_gaussian_vectors(rng):
    F = ChaosVector.from_kernels([random_kernel(rng, 3, 1) for _ in range(3)])
    assert delta_C(F) <= 1e-14


def test_contraction_expansion_examples(rng):
    assert contraction_expansion_norm(E00, E00, 2.0) == pytest.approx(8.0, rel=1e-14)
    # disjoint rank-one kernels: inner product is 0 and only the r-sum survives
    f = SymmetricKernel(2, 2, {(0, 0): 1.0})
    g = SymmetricKernel(2, 2, {(1, 1): 1.0})
    assert contraction_expansion_norm(f, g, 0.0) == 0.0
    # p=1 < q=2, alpha=0: single r=1 term 1 * 0!^2 * 1 * 1 * 1! * ||f ~⊗_1 g||^2
    h, k = random_kernel(rng, 3, 1), random_kernel(rng, 3, 2)
    expected = norm_sq(contract_sym(h, k, 1))
    assert contraction_expansion_norm(h, k, 0.0) == pytest.approx(expected, rel=1e-14)
    F = ChaosVector.from_kernels([h, k])
    assert delta_pair_terms(F)[0, 1] == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        contraction_expansion_norm(k, h, 0.0)


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_pair_terms_two_derivations_agree(seed):
    F = random_pure_vector(np.random.default_rng(seed), max_order=4)
    T, M = delta_pair_terms(F), expansion_pair_terms(F)
    np.testing.assert_allclose(T, M, rtol=1e-10, atol=1e-12)


def test_psi_examples():
    assert psi([1], [0.0], [1.0]) == 0.0
    assert psi([2], [48.0], [2.0]) == pytest.approx(2 * math.sqrt(48), rel=1e-15)


def test_psi_mixed_orders_literal_value():
    # the equal-order diagonal (2,2) contributes sqrt(2*C(2,1)) * sqrt(48);
    # the cross pair (2,1) contributes sqrt(2) * sqrt(1) * 48**(1/4);
    # the cross pair (1,2) and the diagonal (1,1) vanish because x_1 = 0
    expected = 2 * math.sqrt(48) + math.sqrt(2) * 48 ** 0.25
    assert psi([1, 2], [0.0, 48.0], [1.0, 2.0]) == pytest.approx(expected, rel=1e-15)
    assert expected == pytest.approx(17.578825896959415, rel=1e-15)


def test_psi_validates_input():
    with pytest.raises(ValueError):
        psi([1, 2], [0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        psi([1], [0.0], [-1.0])


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_delta_bounded_by_psi(seed):
    rng = np.random.default_rng(seed)
    F = random_pure_vector(rng, max_order=4)
    rep = bound_report(F)
    assert rep.delta_le_psi
    for f in F.kernels:
        for g in F.kernels:
            assert pair_estimate_check(f, g).holds
            assert cumulant_majorant_check(f, g).holds


def test_distance_bounds_single_chi_square():
    F = ChaosVector.from_kernels([E00])
    assert d2_bound(F) == pytest.approx(math.sqrt(2), rel=1e-14)
    assert d1_bound(F) == pytest.approx(2.0, rel=1e-14)


def test_d1_infinite_for_singular_covariance(rng):
    f = random_kernel(rng, 3, 2)
    assert d1_bound(ChaosVector.from_kernels([f, f])) == math.inf


def test_opnorm_examples():
    assert opnorm(np.eye(3)) == 1.0
    assert opnorm(np.diag([2.0, 5.0])) == 5.0
    assert opnorm(np.diag([-7.0, 5.0])) == 7.0


@pytest.mark.parametrize("seed", range(10))
def test_jacobi_matches_cubic_roots(seed):
    A = np.random.default_rng(seed).standard_normal((3, 3))
    M = A + A.T
    # characteristic polynomial: -l^3 + tr l^2 - c2 l + det
    tr = np.trace(M)
    c2 = 0.5 * (tr ** 2 - np.trace(M @ M))
    roots = np.sort(np.roots([1.0, -tr, c2, -np.linalg.det(M)]).real)
    np.testing.assert_allclose(jacobi_eigenvalues(M), roots, rtol=1e-9, atol=1e-10)
    assert opnorm(M) == pytest.approx(np.max(np.abs(roots)), rel=1e-9)


def test_jacobi_rejects_non_symmetric():
    with pytest.raises(ValueError):
        jacobi_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_pair_estimates_examples(rng):
    f = random_kernel(rng, 3, 3)
    res = pair_estimate_check(f, f)
    assert res.case == "p=q" and res.holds and res.lhs < res.rhs
    g, h = random_kernel(rng, 3, 2), random_kernel(rng, 3, 4)
    assert pair_estimate_check(g, h).case == "p<q" and pair_estimate_check(g, h).holds
    assert pair_estimate_check(h, g).holds
    z = SymmetricKernel(2, 2)
    zero = pair_estimate_check(z, z)
    assert zero.lhs == 0.0 and zero.rhs == 0.0 and zero.holds


def test_fourth_cumulant_drives_delta_to_zero():
    chis = [fourth_cumulant_closed(demo_kernel(n)) for n in (1, 2, 4, 8, 16)]
    deltas = [delta_C(ChaosVector.from_kernels([demo_kernel(n)])) for n in (1, 2, 4, 8, 16)]
    assert all(a > b for a, b in zip(chis, chis[1:]))
    assert all(a > b for a, b in zip(deltas, deltas[1:]))
