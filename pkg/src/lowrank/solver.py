"""Outer solver loops.

prograamme_solve runs the SVD-free proximal-gradient / alternating
minimization scheme, optionally with adaptive rank continuation.
pgd_solve is the SVD-based baseline (plain proximal gradient descent or,
with a FISTA-like inertial rule, the FISTA baseline). Both record a
per-iteration trace and share the stopping logic.
"""

import csv
import time
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from . import amfit, linalg, operators, prox
from .amfit import FactorPair, FixedI, IncreasingI, Tolerance
from .exceptions import DimensionError, DivergenceError
from .linalg import as_matrix


# ---------------------------------------------------------------------------
# inertial rules

@dataclass(frozen=True)
class Zero:
    """No inertia: a_k = 0."""


@dataclass(frozen=True)
class Constant:
    """Constant inertia a_k = a, a in [0, 1)."""

    a: float

    def __post_init__(self):
        if not 0.0 <= self.a < 1.0:
            raise ValueError(f"constant inertia must lie in [0, 1), got {self.a}")


@dataclass(frozen=True)
class FistaLike:
    """FISTA-style inertia a_k = (k - 1) / (k + d) with d > 2."""

    d: float = 20.0

    def __post_init__(self):
        if not self.d > 2.0:
            raise ValueError(f"FISTA-like rule needs d > 2, got {self.d}")


@dataclass(frozen=True)
class Online:
    """Capped inertia a_k = min{a, c / (k^(1+delta) * step_prev^2)}.

    The cap construction makes the terms a_k * step^2 summable by design.
    """

    a: float = 0.5
    c: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"a must lie in [0, 1], got {self.a}")
        if self.c <= 0.0 or self.delta <= 0.0:
            raise ValueError("c and delta must be positive")


def inertial_value(rule, k, step_norm_prev=0.0):
    """Inertial parameter a_k for outer iteration k >= 1."""
    if k < 1:
        raise ValueError(f"iteration index must be >= 1, got {k}")
    if isinstance(rule, Zero):
        return 0.0
    if isinstance(rule, Constant):
        return rule.a
    if isinstance(rule, FistaLike):
        return (k - 1.0) / (k + rule.d)
    if isinstance(rule, Online):
        if step_norm_prev == 0.0:
            return rule.a
        return min(rule.a, rule.c / (k ** (1.0 + rule.delta) * step_norm_prev**2))
    raise TypeError(f"unknown inertial rule {rule!r}")


# ---------------------------------------------------------------------------
# configuration and traces

@dataclass(frozen=True)
class Continuation:
    """Rank-continuation policy: shrink the factor budget to the rank of U."""

    enabled: bool = False
    burn_in: int = 20
    cadence: int = 10
    rank_tol: float = linalg.DEFAULT_RANK_TOL

    def __post_init__(self):
        if self.cadence < 1:
            raise ValueError(f"cadence must be >= 1, got {self.cadence}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")


@dataclass(frozen=True)
class Stopping:
    """Stopping rule on the iterate step norm.

    step_tol acts on the absolute step |X_k+1 - X_k|; rel_step_tol, when
    positive, additionally stops on the step relative to max(|X_k|, 1).
    """

    step_tol: float = 1e-10
    rel_step_tol: float = 0.0
    max_iter: int = 1000


@dataclass(frozen=True)
class SolverConfig:
    """Bundle of all solver parameters.

    gamma defaults to 1/L when None. trace_level "full" also records the
    objective each iteration (needs an SVD); "light" skips it to keep the
    SVD-free path honest in timing benchmarks.
    """

    gamma: float = None
    rule: object = field(default_factory=Zero)
    inner: object = field(default_factory=lambda: FixedI(1))
    r: int = 10
    continuation: Continuation = field(default_factory=Continuation)
    stop: Stopping = field(default_factory=Stopping)
    trace_level: str = "light"
    probe_exact_prox: bool = False

    def __post_init__(self):
        if self.gamma is not None and self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.r < 1:
            raise ValueError(f"factor rank must be >= 1, got {self.r}")
        if self.trace_level not in ("light", "full"):
            raise ValueError(f"trace_level must be 'light' or 'full', got {self.trace_level!r}")


TRACE_HEADER = ["k", "elapsed_s", "objective", "step_norm", "rank_x", "r", "inner_iters"]


@dataclass
class TraceRecord:
    k: int
    elapsed_s: float
    objective: float
    step_norm: float
    rank_x: int
    r: int
    inner_iters: int
    rank_exact_prox: int = None


@dataclass
class SolveTrace:
    """Per-iteration records and the final state of one solver run."""

    records: list
    X: np.ndarray
    converged: bool
    iterations: int
    seconds: float
    seed: int = None
    gamma: float = None
    lipschitz: float = None
    notes: tuple = ()

    @property
    def final_rank(self):
        return self.records[-1].rank_x if self.records else 0

    def column(self, name):
        return [getattr(rec, name) for rec in self.records]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_HEADER)
            for rec in self.records:
                w.writerow(
                    [
                        rec.k,
                        repr(rec.elapsed_s),
                        repr(rec.objective) if rec.objective == rec.objective else "nan",
                        repr(rec.step_norm),
                        rec.rank_x,
                        rec.r,
                        rec.inner_iters,
                    ]
                )

    def summary(self, config=None, algorithm=None):
        out = {
            "algorithm": algorithm,
            "seed": self.seed,
            "converged": self.converged,
            "iterations": self.iterations,
            "final_rank": self.final_rank,
            "total_seconds": self.seconds,
            "gamma": self.gamma,
            "lipschitz": self.lipschitz,
            "notes": list(self.notes),
        }
        if config is not None:
            out["config"] = config_to_dict(config)
        return out


def config_to_dict(cfg):
    """JSON-serializable echo of a SolverConfig."""
    d = asdict(cfg)
    d["rule"] = {"type": type(cfg.rule).__name__, **asdict(cfg.rule)}
    d["inner"] = {"type": type(cfg.inner).__name__, **asdict(cfg.inner)}
    return d


# ---------------------------------------------------------------------------
# factor utilities

def truncate_factors(U, V, new_r):
    """Best rank-new_r factor pair approximating U @ V.

    Thin QR of U and of V^T reduce the problem to an SVD of the small
    r x r core; the singular weight is split evenly between the factors.
    """
    U = as_matrix(U, "U")
    V = as_matrix(V, "V")
    r = U.shape[1]
    if V.shape[0] != r:
        raise DimensionError(f"inner dimensions differ: {U.shape} x {V.shape}")
    if new_r > r:
        raise ValueError(f"new_r={new_r} exceeds current factor rank {r}")
    if new_r == 0:
        warnings.warn("rank-0 factor budget is degenerate; using rank 1")
        new_r = 1
    Qu, Ru = np.linalg.qr(U)
    Qv, Rv = np.linalg.qr(V.T)
    P, s, Qt = np.linalg.svd(Ru @ Rv.T)
    root = np.sqrt(s[:new_r])
    U_new = Qu @ (P[:, :new_r] * root)
    V_new = (root[:, None] * Qt[:new_r]) @ Qv.T
    return FactorPair(U_new, V_new)


def _factored_rank(U, V, rel_tol):
    """Numerical rank of U @ V via the r x r core, without forming the product's SVD."""
    Ru = np.linalg.qr(U, mode="r")
    Rv = np.linalg.qr(V.T, mode="r")
    s = np.linalg.svd(Ru @ Rv.T, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


# ---------------------------------------------------------------------------
# solvers

def _check_start(p, X0):
    shape = p.domain_shape
    if X0 is None:
        return np.zeros(shape)
    X0 = as_matrix(X0, "X0")
    if X0.shape != shape:
        raise DimensionError(f"X0 shape {X0.shape} != domain {shape}")
    return X0.copy()


def _resolve_gamma(p, cfg):
    L = operators.lipschitz_bound(p)
    gamma = cfg.gamma if cfg.gamma is not None else 1.0 / L
    return gamma, L

def _notes(cfg, gamma, L):
    notes = []
    if isinstance(cfg.rule, FistaLike) and gamma * L >= 1.0:
        notes.append(
            "step size meets or exceeds the classical FISTA bound 1/L; "
            "convergence is empirical only"
        )
    return tuple(notes)


def prograamme_solve(p, cfg, X0=None, seed=0):
    """SVD-free proximal gradient with alternating-minimization inner loop.

    Iterates the inertial extrapolation, a gradient step on the weighted
    loss, and the factored inner solve whose product replaces the SVT
    step. With cfg.continuation.enabled, the factor budget r is shrunk to
    the numerical rank of U every cadence iterations after burn_in.

    Args:
        p: Problem instance.
        cfg: SolverConfig; cfg.r is the (initial) factor rank budget.
        X0: Starting iterate, zero matrix by default.
        seed: Seed for the cold-start factor generator.

    Returns:
        SolveTrace. Elapsed times cover the iteration loop only; trace
        bookkeeping (rank, objective) is excluded from the clock.
    """
    X = _check_start(p, X0)
    m, n = X.shape
    gamma, L = _resolve_gamma(p, cfg)
    mu = p.tau * gamma
    rng = np.random.default_rng(seed)
    r = min(cfg.r, min(m, n))
    pair = amfit.random_pair(m, n, r, rng)
    cont = cfg.continuation

    X_prev = X
    step_prev = 0.0
    records = []
    elapsed = 0.0
    converged = False
    k = 0
    for k in range(1, cfg.stop.max_iter + 1):
        t0 = time.perf_counter()
        a = inertial_value(cfg.rule, k, step_prev)
        Y = X + a * (X - X_prev)
        Z = Y - gamma * operators.gradient(p, Y)
        if not np.all(np.isfinite(Z)):
            trace = SolveTrace(records, X, False, k - 1, elapsed, seed, gamma, L)
            raise DivergenceError(
                f"gradient step became non-finite at iteration {k} "
                f"(gamma={gamma:.3e}, L={L:.3e})",
                trace=trace,
            )
        policy = cfg.inner.resolve(k) if isinstance(cfg.inner, IncreasingI) else cfg.inner
        if pair.is_zero():
            # degenerate fixed point of the inner iteration; restart
            pair = amfit.random_pair(m, n, r, rng)
        pair, inner_iters = amfit.inner_solve(Z, mu, pair, policy)
        X_new = pair.product()
        step = float(np.linalg.norm(X_new - X))
        if cont.enabled and k >= cont.burn_in and (k - cont.burn_in) % cont.cadence == 0:
            new_r = linalg.numerical_rank(pair.U, cont.rank_tol)
            if new_r < r:
                pair = truncate_factors(pair.U, pair.V, new_r)
                r = pair.r
        elapsed += time.perf_counter() - t0

        if not np.all(np.isfinite(X_new)):
            trace = SolveTrace(records, X, False, k - 1, elapsed, seed, gamma, L)
            raise DivergenceError(
                f"iterate became non-finite at iteration {k} "
                f"(gamma={gamma:.3e}, L={L:.3e})",
                trace=trace,
            )

        # truncation is lossless beyond the detected rank, so the current
        # pair reports the same numerical rank as X_new
        rank_x = _factored_rank(pair.U, pair.V, cont.rank_tol)
        obj = operators.objective(p, X_new) if cfg.trace_level == "full" else float("nan")
        rank_R = None
        if cfg.probe_exact_prox:
            _, rank_R = prox.svt_with_rank(Z, mu)
        records.append(TraceRecord(k, elapsed, obj, step, rank_x, r, inner_iters, rank_R))

        X_prev, X, step_prev = X, X_new, step
        if step <= cfg.stop.step_tol or (
            cfg.stop.rel_step_tol > 0.0
            and step <= cfg.stop.rel_step_tol * max(float(np.linalg.norm(X_prev)), 1.0)
        ):
            converged = True
            break

    return SolveTrace(records, X, converged, k, elapsed, seed, gamma, L,
                      notes=_notes(cfg, gamma, L))


def pgd_solve(p, cfg, X0=None, seed=0):
    """SVD-based inertial proximal gradient descent baseline.

    Identical outer loop to prograamme_solve but the proximal step is
    computed exactly by singular value thresholding. With rule Zero this
    is plain PGD; with a FistaLike rule it is the FISTA baseline.
    """
    X = _check_start(p, X0)
    gamma, L = _resolve_gamma(p, cfg)
    mu = p.tau * gamma
    r_budget = min(X.shape)

    X_prev = X
    step_prev = 0.0
    records = []
    elapsed = 0.0
    converged = False
    k = 0
    for k in range(1, cfg.stop.max_iter + 1):
        t0 = time.perf_counter()
        a = inertial_value(cfg.rule, k, step_prev)
        Y = X + a * (X - X_prev)
        Z = Y - gamma * operators.gradient(p, Y)
        if not np.all(np.isfinite(Z)):
            trace = SolveTrace(records, X, False, k - 1, elapsed, seed, gamma, L)
            raise DivergenceError(
                f"gradient step became non-finite at iteration {k} "
                f"(gamma={gamma:.3e}, L={L:.3e})",
                trace=trace,
            )
        X_new, rank_x = prox.svt_with_rank(Z, mu)
        step = float(np.linalg.norm(X_new - X))
        elapsed += time.perf_counter() - t0

        if not np.all(np.isfinite(X_new)):
            trace = SolveTrace(records, X, False, k - 1, elapsed, seed, gamma, L)
            raise DivergenceError(
                f"iterate became non-finite at iteration {k} "
                f"(gamma={gamma:.3e}, L={L:.3e})",
                trace=trace,
            )

        obj = operators.objective(p, X_new) if cfg.trace_level == "full" else float("nan")
        records.append(TraceRecord(k, elapsed, obj, step, rank_x, r_budget, 0))

        X_prev, X, step_prev = X, X_new, step
        if step <= cfg.stop.step_tol or (
            cfg.stop.rel_step_tol > 0.0
            and step <= cfg.stop.rel_step_tol * max(float(np.linalg.norm(X_prev)), 1.0)
        ):
            converged = True
            break

    return SolveTrace(records, X, converged, k, elapsed, seed, gamma, L,
                      notes=_notes(cfg, gamma, L))


def check_convergence_conditions(trace, rule):
    """Empirical check of the summability condition sum a_k * step_k^2.

    Diagnostic only; never alters a run. Recomputes a_k from the recorded
    step norms and reports the partial sums plus a heuristic flag that is
    set when the late terms are not decaying relative to the early ones.
    """
    steps = trace.column("step_norm")
    terms = []
    prev = 0.0
    for rec, s in zip(trace.records, steps):
        a = inertial_value(rule, rec.k, prev)
        terms.append(a * s * s)
        prev = s
    partial = list(np.cumsum(terms)) if terms else []
    suspect = False
    if len(terms) >= 8:
        half = len(terms) // 2
        early = float(np.mean(terms[:half]))
        late = float(np.mean(terms[half:]))
        suspect = late > 0.0 and late >= early
    return {
        "terms": terms,
        "partial_sums": partial,
        "total": partial[-1] if partial else 0.0,
        "suspect_nonsummable": suspect,
    }
