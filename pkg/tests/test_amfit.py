import numpy as np
import pytest

from lowrank import amfit
from lowrank.amfit import (FactorPair, FixedI, IncreasingI, Tolerance,
                           inner_objective, inner_solve, random_pair,
                           update_U, update_V)
from lowrank.exceptions import DimensionError
from lowrank.prox import svt_with_rank


def test_factor_pair_shapes():
    with pytest.raises(DimensionError):
        FactorPair(np.ones((3, 2)), np.ones((3, 4)))


def test_factor_pair_product_and_zero():
    pair = FactorPair(np.zeros((3, 2)), np.ones((2, 4)))
    assert pair.is_zero()
    assert pair.r == 2
    np.testing.assert_array_equal(pair.product(), np.zeros((3, 4)))


def test_random_pair_scale():
    rng = np.random.default_rng(0)
    pair = random_pair(200, 100, 16, rng)
    # entries are N(0, 1/r); column norms of U concentrate near sqrt(m/r)
    assert np.std(pair.U) == pytest.approx(0.25, rel=0.05)
    assert not pair.is_zero()


def test_update_U_zero_V():
    Z = np.ones((3, 4))
    U = update_U(Z, np.zeros((2, 4)), 0.5)
    np.testing.assert_array_equal(U, np.zeros((3, 2)))


def test_update_U_identity_V():
    # with V = I the minimizer is Z / (1 + mu)
    rng = np.random.default_rng(1)
    Z = rng.standard_normal((5, 4))
    U = update_U(Z, np.eye(4), 0.25)
    np.testing.assert_allclose(U, Z / 1.25, atol=1e-12)


def test_update_V_identity_U():
    rng = np.random.default_rng(2)
    Z = rng.standard_normal((4, 6))
    V = update_V(Z, np.eye(4), 0.5)
    np.testing.assert_allclose(V, Z / 1.5, atol=1e-12)


def test_updates_are_exact_minimizers():
    # perturbing the updated factor never lowers the inner objective
    rng = np.random.default_rng(3)
    Z = rng.standard_normal((6, 5))
    V = rng.standard_normal((3, 5))
    mu = 0.8
    U = update_U(Z, V, mu)
    base = inner_objective(Z, U, V, mu)
    for _ in range(20):
        assert base <= inner_objective(Z, U + 1e-3 * rng.standard_normal(U.shape), V, mu) + 1e-12
    U2 = rng.standard_normal((6, 3))
    V2 = update_V(Z, U2, mu)
    base = inner_objective(Z, U2, V2, mu)
    for _ in range(20):
        assert base <= inner_objective(Z, U2, V2 + 1e-3 * rng.standard_normal(V2.shape), mu) + 1e-12


def test_update_rejects_bad_mu():
    with pytest.raises(ValueError):
        update_U(np.ones((2, 2)), np.ones((1, 2)), 0.0)


def test_inner_objective_nonincreasing():
    rng = np.random.default_rng(4)
    Z = rng.standard_normal((8, 7))
    pair = random_pair(8, 7, 4, rng)
    mu = 0.3
    prev = inner_objective(Z, pair.U, pair.V, mu)
    for _ in range(10):
        pair, _ = inner_solve(Z, mu, pair, FixedI(1))
        cur = inner_objective(Z, pair.U, pair.V, mu)
        assert cur <= prev + 1e-12
        prev = cur


def test_inner_solve_reaches_svt():
    rng = np.random.default_rng(5)
    Z = rng.standard_normal((10, 8))
    for mu in (0.5, 2.0):
        target, rank = svt_with_rank(Z, mu)
        pair = random_pair(10, 8, max(rank, 1), rng)
        pair, _ = inner_solve(Z, mu, pair, Tolerance(1e-12, 500))
        assert np.linalg.norm(pair.product() - target) <= 1e-6 * max(np.linalg.norm(Z), 1.0)


def test_inner_solve_shrinks_zero_target():
    rng = np.random.default_rng(6)
    pair = random_pair(5, 5, 3, rng)
    pair, _ = inner_solve(np.zeros((5, 5)), 1.0, pair, FixedI(50))
    assert np.linalg.norm(pair.product()) <= 1e-10


def test_fixed_policy_pass_count():
    rng = np.random.default_rng(7)
    Z = rng.standard_normal((6, 6))
    pair = random_pair(6, 6, 2, rng)
    _, passes = inner_solve(Z, 0.5, pair, FixedI(3))
    assert passes == 3


def test_tolerance_policy_caps_passes():
    rng = np.random.default_rng(8)
    Z = rng.standard_normal((6, 6))
    pair = random_pair(6, 6, 2, rng)
    _, passes = inner_solve(Z, 0.5, pair, Tolerance(0.0, 7))
    assert passes == 7
    _, passes = inner_solve(Z, 0.5, pair, Tolerance(1e10, 7))
    assert passes == 1


def test_rank_bounded_by_budget():
    rng = np.random.default_rng(9)
    Z = rng.standard_normal((12, 10))
    pair = random_pair(12, 10, 3, rng)
    pair, _ = inner_solve(Z, 0.1, pair, Tolerance(1e-10, 200))
    assert np.linalg.matrix_rank(pair.product()) <= 3


def test_increasing_policy_resolution():
    pol = IncreasingI(start=1, every=50)
    assert pol.resolve(1) == FixedI(1)
    assert pol.resolve(50) == FixedI(1)
    assert pol.resolve(51) == FixedI(2)
    assert pol.resolve(101) == FixedI(3)


def test_inner_solve_shape_check():
    rng = np.random.default_rng(10)
    pair = random_pair(4, 4, 2, rng)
    with pytest.raises(DimensionError):
        inner_solve(np.ones((5, 4)), 0.5, pair, FixedI(1))
