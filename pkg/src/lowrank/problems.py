"""Seeded synthetic problem generators and evaluation metrics.

Ground truths are products of independent full-rank Gaussian factors, so
their rank equals the factor width exactly. All randomness flows through
numpy's default PCG64 generator seeded from the spec, making every
generated instance reproducible across platforms.
"""

import json
from dataclasses import dataclass, field, asdict, replace

import numpy as np

from . import linalg
from .exceptions import DimensionError, InvalidSpecError, UndefinedMetricError
from .linalg import as_matrix
from .operators import DenseSensing, EntryMask, Identity, Problem, vec


# ---------------------------------------------------------------------------
# spec variants

@dataclass(frozen=True)
class GaussianScaled:
    """Gaussian noise scaled by eta_factor times the largest ground-truth entry.

    With sparsity set, the noise lives on a random support of that fraction.
    """

    eta_factor: float = 0.2
    sparsity: float = None


@dataclass(frozen=True)
class SparseLarge:
    """Uniform noise from [low, high] on a random support of fraction sparsity."""

    low: float = -50.0
    high: float = 50.0
    sparsity: float = 0.1


@dataclass(frozen=True)
class AdditiveGaussian:
    """Dense i.i.d. Gaussian noise with standard deviation sigma."""

    sigma: float = 1.0


@dataclass(frozen=True)
class AllOnes:
    """Unit weights everywhere."""


@dataclass(frozen=True)
class UniformInt:
    """Integer weights drawn uniformly from [w_min, w_max]."""

    w_min: int = 1
    w_max: int = 10


@dataclass(frozen=True)
class LargeOnSupport:
    """Weights in [w_min, w_max] on a random support of the given fraction, 1 elsewhere."""

    fraction: float = 0.1
    w_min: float = 5.0
    w_max: float = 10.0


_NOISE_TYPES = {c.__name__: c for c in (GaussianScaled, SparseLarge, AdditiveGaussian)}
_WEIGHT_TYPES = {c.__name__: c for c in (AllOnes, UniformInt, LargeOnSupport)}


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic recovery instance.

    mask_fraction switches on an entry-mask (matrix completion) operator;
    sensing_dim switches on a dense Gaussian sensing operator of that many
    measurements. At most one of the two may be set.
    """

    m: int
    n: int
    rank: int
    noise: object = field(default_factory=AdditiveGaussian)
    weights: object = field(default_factory=AllOnes)
    mask_fraction: float = None
    exact_mask_count: bool = False
    sensing_dim: int = None
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InvalidSpecError(f"dimensions must be positive, got {self.m}x{self.n}")
        if not 1 <= self.rank:
            raise InvalidSpecError(f"rank must be >= 1, got {self.rank}")
        if self.rank >= min(self.m, self.n):
            raise InvalidSpecError(
                f"rank {self.rank} must be < min(m, n) = {min(self.m, self.n)}"
            )
        if self.mask_fraction is not None and not 0.0 < self.mask_fraction <= 1.0:
            raise InvalidSpecError(f"mask fraction must lie in (0, 1], got {self.mask_fraction}")
        if self.mask_fraction is not None and self.sensing_dim is not None:
            raise InvalidSpecError("mask and dense sensing are mutually exclusive")
        if self.sensing_dim is not None and self.sensing_dim < 1:
            raise InvalidSpecError(f"sensing_dim must be >= 1, got {self.sensing_dim}")
        for frac in (getattr(self.noise, "sparsity", None),
                     getattr(self.weights, "fraction", None)):
            if frac is not None and not 0.0 < frac < 1.0:
                raise InvalidSpecError(f"support fraction must lie in (0, 1), got {frac}")
        wmin = getattr(self.weights, "w_min", None)
        if wmin is not None and wmin > self.weights.w_max:
            raise InvalidSpecError("w_min must not exceed w_max")


def spec_to_dict(spec):
    d = asdict(spec)
    d["noise"] = {"type": type(spec.noise).__name__, **asdict(spec.noise)}
    d["weights"] = {"type": type(spec.weights).__name__, **asdict(spec.weights)}
    return d


def spec_from_dict(d):
    d = dict(d)
    noise = dict(d.get("noise", {"type": "AdditiveGaussian"}))
    weights = dict(d.get("weights", {"type": "AllOnes"}))
    try:
        noise_cls = _NOISE_TYPES[noise.pop("type")]
        weight_cls = _WEIGHT_TYPES[weights.pop("type")]
        d["noise"] = noise_cls(**noise)
        d["weights"] = weight_cls(**weights)
        return SyntheticSpec(**d)
    except (KeyError, TypeError) as exc:
        raise InvalidSpecError(f"malformed synthetic spec: {exc}") from exc


def load_spec(path):
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def save_spec(path, spec):
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)


# ---------------------------------------------------------------------------
# generation

@dataclass
class GeneratedProblem:
    """Full output of the generator, including pieces the Problem drops."""

    spec: SyntheticSpec
    op: object
    F: np.ndarray
    W: np.ndarray
    ground_truth: np.ndarray
    noise: np.ndarray
    mask: np.ndarray = None
    sensing: np.ndarray = None

    @property
    def noise_norm(self):
        return float(np.linalg.norm(self.noise))

    def problem(self, tau):
        return Problem(self.op, self.F, self.W, tau)


def _support(rng, m, n, fraction):
    """Exactly floor(fraction * m * n) entry indices, chosen without replacement."""
    count = int(np.floor(fraction * m * n))
    flat = rng.permutation(m * n)[:count]
    sel = np.zeros(m * n, dtype=bool)
    sel[flat] = True
    return sel.reshape(m, n)


def _make_noise(rng, spec, shape, ground_truth):
    m, n = shape
    if isinstance(spec.noise, GaussianScaled):
        S = rng.standard_normal(shape)
        if spec.noise.sparsity is not None:
            S = S * _support(rng, m, n, spec.noise.sparsity)
        eta = spec.noise.eta_factor * float(np.max(ground_truth))
        return eta * S
    if isinstance(spec.noise, SparseLarge):
        S = rng.uniform(spec.noise.low, spec.noise.high, size=shape)
        return S * _support(rng, m, n, spec.noise.sparsity)
    if isinstance(spec.noise, AdditiveGaussian):
        return spec.noise.sigma * rng.standard_normal(shape)
    raise InvalidSpecError(f"unknown noise variant {spec.noise!r}")


def _make_weights(rng, spec, shape):
    m, n = shape
    if isinstance(spec.weights, AllOnes):
        return np.ones(shape)
    if isinstance(spec.weights, UniformInt):
        return rng.integers(spec.weights.w_min, spec.weights.w_max + 1,
                            size=shape).astype(float)
    if isinstance(spec.weights, LargeOnSupport):
        W = np.ones(shape)
        sel = _support(rng, m, n, spec.weights.fraction)
        W[sel] = rng.uniform(spec.weights.w_min, spec.weights.w_max,
                             size=int(sel.sum()))
        return W
    raise InvalidSpecError(f"unknown weight variant {spec.weights!r}")


def generate_full(spec):
    """Generate one instance, retaining noise, mask, and sensing matrices.

    Draw order is fixed (factors, mask/sensing, noise, weights) so a given
    (spec, seed) always produces identical output.
    """
    rng = np.random.default_rng(spec.seed)
    m, n = spec.m, spec.n
    A = rng.standard_normal((m, spec.rank))
    B = rng.standard_normal((spec.rank, n))
    X = A @ B

    mask = None
    sensing = None
    if spec.sensing_dim is not None:
        # 1/sqrt(d) scaling makes the sensing map a near-isometry, so
        # measurement and domain scales match
        d = spec.sensing_dim
        sensing = rng.standard_normal((d, m * n)) / np.sqrt(d)
        op = DenseSensing(sensing, (m, n))
        noise = _make_noise(rng, spec, op.codomain_shape, X)
        F = sensing @ vec(X) + noise
    elif spec.mask_fraction is not None:
        if spec.exact_mask_count:
            mask = _support(rng, m, n, spec.mask_fraction).astype(float)
        else:
            mask = (rng.random((m, n)) < spec.mask_fraction).astype(float)
        op = EntryMask(mask)
        noise = _make_noise(rng, spec, (m, n), X)
        F = mask * X + noise
    else:
        op = Identity((m, n))
        noise = _make_noise(rng, spec, (m, n), X)
        F = X + noise

    W = _make_weights(rng, spec, op.codomain_shape)
    return GeneratedProblem(spec, op, F, W, X, noise, mask, sensing)


def generate(spec, tau=1.0):
    """Generate a (Problem, ground_truth) pair.

    tau is a modeling choice left to the caller; see generate_full for the
    richer output the CLI uses to derive noise-based tau presets.
    """
    gen = generate_full(spec)
    return gen.problem(tau), gen.ground_truth


# ---------------------------------------------------------------------------
# metrics

def rmse(F, X):
    """Root mean squared entrywise error |F - X| / sqrt(mn)."""
    F = as_matrix(F, "F")
    X = as_matrix(X, "X")
    if F.shape != X.shape:
        raise DimensionError(f"shape mismatch: {F.shape} vs {X.shape}")
    return float(np.linalg.norm(F - X)) / np.sqrt(F.size)


def fidelity(F, X, W, inside=True):
    """Weighted residual |(F - X) . W| / |W|, or its complement.

    With inside=False the selector is 1 - W, which requires a binary W;
    an all-zero selector makes the metric undefined.
    """
    F = as_matrix(F, "F")
    X = as_matrix(X, "X")
    W = as_matrix(W, "W")
    if F.shape != X.shape or F.shape != W.shape:
        raise DimensionError("F, X, W must share a shape")
    if not inside:
        if not np.all((W == 0.0) | (W == 1.0)):
            raise ValueError("outside fidelity requires a binary weight matrix")
        W = 1.0 - W
    denom = float(np.linalg.norm(W))
    if denom == 0.0:
        raise UndefinedMetricError("selector is identically zero")
    return float(np.linalg.norm((F - X) * W)) / denom


def condition_number_sweep(base, max_weights, tau=1.0):
    """One problem per weight maximum, with the weight condition number.

    Args:
        base: SyntheticSpec whose weights are UniformInt with w_min = 1.
        max_weights: Iterable of integer weight maxima.
        tau: Regularization weight for the generated problems; either a
            scalar or a callable of the weight maximum.

    Returns:
        List of (Problem, kappa_W) pairs; kappa_W is inf for singular W.
    """
    if not isinstance(base.weights, UniformInt) or base.weights.w_min != 1:
        raise InvalidSpecError("sweep requires UniformInt weights with w_min = 1")
    out = []
    for i, w_max in enumerate(max_weights):
        spec = replace(base, weights=UniformInt(1, int(w_max)), seed=base.seed + i)
        gen = generate_full(spec)
        _, s, _ = linalg.thin_svd(gen.W)
        if s[-1] <= 1e-300 or s[-1] <= 1e-15 * s[0]:
            kappa = float("inf")
        else:
            kappa = float(s[0] / s[-1])
        tau_value = tau(w_max) if callable(tau) else tau
        out.append((gen.problem(tau_value), kappa))
    return out
