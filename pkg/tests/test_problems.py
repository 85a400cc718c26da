import numpy as np
import pytest

from lowrank import problems
from lowrank.exceptions import (DimensionError, InvalidSpecError,
                                UndefinedMetricError)
from lowrank.operators import DenseSensing, EntryMask, Identity
from lowrank.problems import (AdditiveGaussian, AllOnes, GaussianScaled,
                              LargeOnSupport, SparseLarge, SyntheticSpec,
                              UniformInt, condition_number_sweep, fidelity,
                              generate, generate_full, rmse, spec_from_dict,
                              spec_to_dict)


def test_spec_validation():
    with pytest.raises(InvalidSpecError):
        SyntheticSpec(10, 10, 10)
    with pytest.raises(InvalidSpecError):
        SyntheticSpec(10, 10, 0)
    with pytest.raises(InvalidSpecError):
        SyntheticSpec(0, 10, 1)
    with pytest.raises(InvalidSpecError):
        SyntheticSpec(10, 10, 2, mask_fraction=1.5)
    with pytest.raises(InvalidSpecError):
        SyntheticSpec(10, 10, 2, mask_fraction=0.5, sensing_dim=20)
    with pytest.raises(InvalidSpecError):
        SyntheticSpec(10, 10, 2, weights=UniformInt(5, 2))


def test_spec_json_roundtrip():
    spec = SyntheticSpec(
        20, 15, 3, noise=SparseLarge(-50, 50, 0.1),
        weights=LargeOnSupport(0.2, 5.0, 10.0), mask_fraction=0.7, seed=9,
    )
    assert spec_from_dict(spec_to_dict(spec)) == spec


def test_spec_from_dict_rejects_unknown_type():
    with pytest.raises(InvalidSpecError):
        spec_from_dict({"m": 5, "n": 5, "rank": 1, "noise": {"type": "Cauchy"}})


def test_generator_is_deterministic():
    spec = SyntheticSpec(12, 14, 2, noise=AdditiveGaussian(0.5),
                         weights=UniformInt(1, 10), mask_fraction=0.5, seed=3)
    g1 = generate_full(spec)
    g2 = generate_full(spec)
    np.testing.assert_array_equal(g1.F, g2.F)
    np.testing.assert_array_equal(g1.W, g2.W)
    np.testing.assert_array_equal(g1.ground_truth, g2.ground_truth)
    np.testing.assert_array_equal(g1.noise, g2.noise)
    g3 = generate_full(problems.SyntheticSpec(12, 14, 2, noise=AdditiveGaussian(0.5),
                                              weights=UniformInt(1, 10),
                                              mask_fraction=0.5, seed=4))
    assert np.any(g3.F != g1.F)


def test_ground_truth_rank_exact():
    for rank in (1, 4, 9):
        gen = generate_full(SyntheticSpec(25, 30, rank, seed=rank))
        assert np.linalg.matrix_rank(gen.ground_truth) == rank


def test_operator_selection():
    assert isinstance(generate_full(SyntheticSpec(8, 8, 2)).op, Identity)
    assert isinstance(
        generate_full(SyntheticSpec(8, 8, 2, mask_fraction=0.5)).op, EntryMask
    )
    assert isinstance(
        generate_full(SyntheticSpec(8, 8, 2, sensing_dim=30)).op, DenseSensing
    )


def test_mask_density_close_to_requested():
    gen = generate_full(SyntheticSpec(2000, 2000, 4, mask_fraction=0.5, seed=0))
    density = float(np.mean(gen.mask))
    assert abs(density - 0.5) <= 0.01 * 0.5


def test_exact_mask_count():
    gen = generate_full(
        SyntheticSpec(40, 50, 2, mask_fraction=0.3, exact_mask_count=True, seed=1)
    )
    assert int(gen.mask.sum()) == int(np.floor(0.3 * 40 * 50))


def test_uniform_int_weights_in_range():
    gen = generate_full(SyntheticSpec(50, 50, 2, weights=UniformInt(1, 10), seed=2))
    assert gen.W.min() >= 1.0 and gen.W.max() <= 10.0
    assert np.all(gen.W == np.round(gen.W))
    # all ten values should appear on 2500 draws
    assert len(np.unique(gen.W)) == 10


def test_large_on_support_weights():
    gen = generate_full(
        SyntheticSpec(40, 40, 2, weights=LargeOnSupport(0.1, 5.0, 10.0), seed=3)
    )
    big = gen.W > 1.0
    assert int(big.sum()) == int(np.floor(0.1 * 1600))
    assert np.all(gen.W[~big] == 1.0)
    assert gen.W[big].min() >= 5.0 and gen.W[big].max() <= 10.0


def test_gaussian_scaled_noise_magnitude():
    spec = SyntheticSpec(60, 60, 3, noise=GaussianScaled(eta_factor=0.2), seed=4)
    gen = generate_full(spec)
    eta = 0.2 * float(np.max(gen.ground_truth))
    assert np.std(gen.noise) == pytest.approx(eta, rel=0.1)


def test_gaussian_scaled_sparse_support():
    spec = SyntheticSpec(40, 40, 3, noise=GaussianScaled(0.2, sparsity=0.1), seed=5)
    gen = generate_full(spec)
    assert int(np.count_nonzero(gen.noise)) == int(np.floor(0.1 * 1600))


def test_sparse_large_noise():
    spec = SyntheticSpec(50, 50, 3, noise=SparseLarge(-50, 50, 0.1), seed=6)
    gen = generate_full(spec)
    nz = gen.noise[gen.noise != 0.0]
    assert len(nz) == int(np.floor(0.1 * 2500))
    assert nz.min() >= -50.0 and nz.max() <= 50.0


def test_sensing_measurements_consistent():
    spec = SyntheticSpec(10, 10, 2, noise=AdditiveGaussian(0.1),
                         sensing_dim=40, seed=7)
    gen = generate_full(spec)
    assert gen.sensing.shape == (40, 100)
    assert gen.F.shape == (40, 1)
    from lowrank.operators import apply
    np.testing.assert_allclose(
        gen.F, apply(gen.op, gen.ground_truth) + gen.noise, atol=1e-12
    )


def test_generate_returns_problem():
    p, gt = generate(SyntheticSpec(10, 12, 2, seed=8), tau=0.5)
    assert p.tau == 0.5
    assert p.domain_shape == (10, 12)
    assert gt.shape == (10, 12)


def test_rmse_values():
    assert rmse(np.zeros((2, 2)), np.zeros((2, 2))) == 0.0
    assert rmse(np.ones((2, 2)), np.zeros((2, 2))) == pytest.approx(1.0)
    F = np.array([[3.0, 0.0], [0.0, 0.0]])
    assert rmse(F, np.zeros((2, 2))) == pytest.approx(1.5)
    with pytest.raises(DimensionError):
        rmse(np.ones((2, 2)), np.ones((2, 3)))


def test_fidelity_inside_and_outside():
    F = np.array([[1.0, 2.0], [3.0, 4.0]])
    X = np.zeros((2, 2))
    W = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert fidelity(F, X, W) == pytest.approx(np.sqrt(1 + 16) / np.sqrt(2))
    assert fidelity(F, X, W, inside=False) == pytest.approx(np.sqrt(4 + 9) / np.sqrt(2))


def test_fidelity_error_cases():
    F = np.ones((2, 2))
    with pytest.raises(ValueError):
        fidelity(F, F, 2.0 * np.ones((2, 2)), inside=False)
    with pytest.raises(UndefinedMetricError):
        fidelity(F, F, np.ones((2, 2)), inside=False)


def test_condition_number_sweep_basic():
    base = SyntheticSpec(30, 30, 3, weights=UniformInt(1, 10), seed=1)
    out = condition_number_sweep(base, [10, 100], tau=lambda w: 1e-2 / w**2)
    assert len(out) == 2
    (p1, k1), (p2, k2) = out
    assert p1.tau == pytest.approx(1e-4)
    assert p2.tau == pytest.approx(1e-6)
    assert 1.0 < k1 < np.inf and 1.0 < k2 < np.inf
    assert p2.W.max() > p1.W.max()


def test_condition_number_sweep_singular_weight():
    # w_max = 1 gives the all-ones rank-1 weight matrix, kappa = inf
    base = SyntheticSpec(20, 20, 2, weights=UniformInt(1, 5), seed=2)
    out = condition_number_sweep(base, [1])
    assert out[0][1] == np.inf


def test_condition_number_sweep_requires_uniform_int():
    base = SyntheticSpec(20, 20, 2, weights=AllOnes(), seed=0)
    with pytest.raises(InvalidSpecError):
        condition_number_sweep(base, [10])
