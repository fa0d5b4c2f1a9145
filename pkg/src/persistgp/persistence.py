"""Survival curves and persistence-exponent estimation by Monte Carlo.

Survival means the running maximum of a path stays strictly below the level
(0 for stationary processes, 1 for self-similar ones) up to a horizon.  The
exponent is the slope of -log p_hat against the horizon (stationary mode) or
against its logarithm (self-similar mode), fitted by weighted least squares
with weights from the binomial variance of log p_hat.

Two standard errors are reported: the WLS formula value (a diagnostic; the
horizon counts share paths, so it understates run-to-run spread) and, when
per-block counts are available, a delete-one-block jackknife over the
independent path blocks, which is the honest Monte Carlo uncertainty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .corr import CorrelationFn, corr_rescaled
from .errors import DomainError, InsufficientSurvivorsError
from .sampler import (
    BLOCK_PATHS,
    PathBatch,
    SampleMethod,
    TimeGrid,
    _block_ranges,
    _block_rng,
    build_covariance,
    chol_block_fn,
    cholesky_factor,
    circ_block_fn,
)

__all__ = [
    "ExponentEstimate",
    "FitMode",
    "McSettings",
    "SurvivalCurve",
    "estimate_exponent",
    "fit_exponent",
    "rescaled_exponent",
    "simulate_survival_curve",
    "survival_curve_gsp",
    "survival_curve_selfsimilar",
    "wilson_interval",
    "write_fit_csv",
    "write_survival_csv",
]

WILSON_Z = 1.959963984540054  # 95%
MAX_PERSISTENCE_STEP = 0.25  # discretization-bias guard for the default pipelines


class FitMode(Enum):
    STATIONARY_LOG_T = "stationary"
    SELF_SIMILAR_LOG_LOG = "loglog"


def wilson_interval(successes: int, n: int, z: float = WILSON_Z):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise DomainError("n must be positive")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    # the score interval contains p_hat by construction; clamp roundoff
    return min(max(0.0, center - half), p), max(min(1.0, center + half), p)


@dataclass
class SurvivalCurve:
    """Per-horizon survivor counts with Wilson 95% bounds.

    block_survivors, when present, holds the per-block counts (one row per
    independent path block) used for jackknife standard errors.
    """

    horizons: np.ndarray
    survivors: np.ndarray
    n_paths: int
    p_hat: np.ndarray = field(init=False)
    ci_low: np.ndarray = field(init=False)
    ci_high: np.ndarray = field(init=False)
    block_survivors: np.ndarray | None = None
    block_sizes: np.ndarray | None = None

    def __post_init__(self):
        self.horizons = np.asarray(self.horizons, dtype=float)
        self.survivors = np.asarray(self.survivors, dtype=np.int64)
        if self.horizons.ndim != 1 or self.horizons.size == 0:
            raise DomainError("horizons must be a nonempty 1-d array")
        if np.any(np.diff(self.horizons) <= 0.0):
            raise DomainError("horizons must be strictly increasing")
        if np.any(np.diff(self.survivors) > 0):
            raise DomainError("survivor counts must be nonincreasing in the horizon")
        if np.any(self.survivors < 0) or np.any(self.survivors > self.n_paths):
            raise DomainError("survivor counts out of range")
        self.p_hat = self.survivors / self.n_paths
        bounds = np.array([wilson_interval(int(k), self.n_paths) for k in self.survivors])
        self.ci_low = bounds[:, 0]
        self.ci_high = bounds[:, 1]


def _horizon_indices(axis, horizons, what):
    axis = np.asarray(axis, dtype=float)
    if horizons is None:
        return np.arange(axis.size), axis
    idx = []
    for T in np.atleast_1d(np.asarray(horizons, dtype=float)):
        j = int(np.argmin(np.abs(axis - T)))
        if abs(axis[j] - T) > 1e-9 * max(1.0, abs(T)):
            raise DomainError(f"horizon {T!r} is not a {what} grid point")
        idx.append(j)
    idx = np.asarray(idx)
    if np.any(np.diff(idx) <= 0):
        raise DomainError("horizons must be strictly increasing grid points")
    return idx, axis[idx]


def _counts_from_batch(values, idx, level):
    running_max = np.maximum.accumulate(values, axis=1)
    return (running_max[:, idx] < level).sum(axis=0).astype(np.int64)


def survival_curve_gsp(batch: PathBatch, horizons=None, level: float = 0.0) -> SurvivalCurve:
    """Survivors below `level` over [0, T_k] for a stationary batch.

    Counts use the running maximum over grid points (strict inequality at
    every point) in one pass; horizons must be grid points.
    """
    if batch.grid is None:
        raise DomainError("survival_curve_gsp needs a stationary batch with a grid")
    idx, hz = _horizon_indices(batch.grid.taus, horizons, "tau")
    counts = _counts_from_batch(batch.values, idx, level)
    return SurvivalCurve(horizons=hz, survivors=counts, n_paths=batch.n_paths)


def survival_curve_selfsimilar(batch: PathBatch, horizons=None, level: float = 1.0) -> SurvivalCurve:
    """Survivors below `level` (default 1) at the algebraic times of a direct batch."""
    if batch.times is None:
        raise DomainError("survival_curve_selfsimilar needs a batch with algebraic times")
    idx, hz = _horizon_indices(batch.times, horizons, "time")
    counts = _counts_from_batch(batch.values, idx, level)
    return SurvivalCurve(horizons=hz, survivors=counts, n_paths=batch.n_paths)


# ---------------------------------------------------------------------------
# exponent fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentEstimate:
    """Fitted persistence exponent with fit window and diagnostics.

    stderr is the jackknife standard error over independent path blocks when
    the curve carries block counts, otherwise the WLS formula value (also
    reported separately as stderr_wls).  two_point_slope is the incremental
    slope across the window, a transient-bias diagnostic.  For rescaled runs
    kappa records the time-scaling, so theta_hat estimates theta_base/kappa.
    """

    theta_hat: float
    stderr: float
    window: tuple
    r_squared: float
    mode: FitMode
    two_point_slope: float
    stderr_wls: float
    n_paths: int
    kappa: float | None = None

    def __post_init__(self):
        if not (self.theta_hat > 0.0):
            raise InsufficientSurvivorsError(
                f"fitted exponent must be positive, got {self.theta_hat!r} "
                "(survival curve is flat or increasing on the window)"
            )


def _default_window(horizons):
    lo_idx = int(math.floor(0.3 * (horizons.size - 1)))
    return float(horizons[lo_idx]), float(horizons[-1])


def _wls_line(x, y, w):
    W = w.sum()
    xb = (w * x).sum() / W
    yb = (w * y).sum() / W
    sxx = (w * (x - xb) ** 2).sum()
    if sxx <= 0.0:
        raise InsufficientSurvivorsError("degenerate fit window (single horizon)")
    slope = (w * (x - xb) * (y - yb)).sum() / sxx
    intercept = yb - slope * xb
    resid = y - slope * x - intercept
    tss = (w * (y - yb) ** 2).sum()
    r2 = 1.0 - (w * resid**2).sum() / tss if tss > 0.0 else 1.0
    return slope, intercept, 1.0 / math.sqrt(sxx), r2


def _fit_arrays(horizons, survivors, n_paths, mode, window):
    lo, hi = window
    sel = (horizons >= lo - 1e-12) & (horizons <= hi + 1e-12)
    if not np.any(sel):
        raise DomainError(f"fit window {window!r} contains no horizons")
    hz = horizons[sel]
    k = survivors[sel]
    usable = k > 0
    if usable.sum() == 0:
        raise InsufficientSurvivorsError("zero survivors at every window horizon")
    if usable.sum() < 2:
        raise InsufficientSurvivorsError("fewer than two window horizons with survivors")
    hz = hz[usable]
    k = k[usable]
    p = k / n_paths
    if mode is FitMode.SELF_SIMILAR_LOG_LOG:
        if np.any(hz <= 0.0):
            raise DomainError("log-log mode needs positive horizons")
        x = np.log(hz)
    else:
        x = hz
    y = -np.log(p)
    # Var(log p_hat) ~ (1-p)/(n p); clip p away from 1 so the weight is finite
    pc = np.minimum(p, 1.0 - 0.5 / n_paths)
    w = n_paths * pc / (1.0 - pc)
    return x, y, w


def fit_exponent(curve: SurvivalCurve, mode: FitMode = FitMode.STATIONARY_LOG_T,
                 window=None, kappa=None) -> ExponentEstimate:
    """WLS fit of -log p_hat on the window; zero-survivor horizons are dropped.

    The default window drops the first 30% of horizons (the exponent is
    asymptotic; early horizons carry the O(1) transient).
    """
    mode = FitMode(mode) if not isinstance(mode, FitMode) else mode
    window = tuple(window) if window is not None else _default_window(curve.horizons)
    x, y, w = _fit_arrays(curve.horizons, curve.survivors, curve.n_paths, mode, window)
    slope, _, se_wls, r2 = _wls_line(x, y, w)
    two_point = (y[-1] - y[0]) / (x[-1] - x[0])
    stderr = se_wls
    if curve.block_survivors is not None:
        stderr = _jackknife_se(curve, mode, window)
    return ExponentEstimate(
        theta_hat=float(slope),
        stderr=float(stderr),
        window=window,
        r_squared=float(min(max(r2, 0.0), 1.0)),
        mode=mode,
        two_point_slope=float(two_point),
        stderr_wls=float(se_wls),
        n_paths=curve.n_paths,
        kappa=kappa,
    )


def _jackknife_se(curve, mode, window):
    blocks = curve.block_survivors
    sizes = curve.block_sizes
    B = blocks.shape[0]
    if B < 2:
        return math.nan
    total = curve.survivors
    thetas = []
    for b in range(B):
        x, y, w = _fit_arrays(
            curve.horizons, total - blocks[b], curve.n_paths - int(sizes[b]), mode, window
        )
        thetas.append(_wls_line(x, y, w)[0])
    thetas = np.asarray(thetas)
    return math.sqrt((B - 1) / B * ((thetas - thetas.mean()) ** 2).sum())


# ---------------------------------------------------------------------------
# streaming Monte Carlo pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McSettings:
    """Budget and grid for one Monte Carlo persistence run."""

    step: float = 0.05
    horizon: float = 10.0
    n_paths: int = 200_000
    seed: int = 0
    method: SampleMethod = SampleMethod.CHOLESKY
    threads: int = 1
    level: float = 0.0
    window: tuple | None = None
    embed_horizon: float | None = None  # circulant: longer embedded grid, counts kept to `horizon`

    def grid(self, horizon=None) -> TimeGrid:
        hz = self.horizon if horizon is None else horizon
        return TimeGrid(step=self.step, n_points=int(round(hz / self.step)) + 1)


def _streamed_counts(block_fn, n_keep, n_paths, seed, level, threads):
    jobs = list(_block_ranges(n_paths))
    blocks = np.zeros((len(jobs), n_keep), dtype=np.int64)
    sizes = np.zeros(len(jobs), dtype=np.int64)

    def run(args):
        b, lo, hi = args
        x = block_fn(b, _block_rng(seed, b), hi - lo)
        running = np.maximum.accumulate(x[:, :n_keep], axis=1)
        blocks[b] = (running < level).sum(axis=0)
        sizes[b] = hi - lo

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(run, jobs))
    else:
        for j in jobs:
            run(j)
    return blocks, sizes


def simulate_survival_curve(corr: CorrelationFn, mc: McSettings) -> SurvivalCurve:
    """Sample the GSP of `corr` block by block and count survivors below level.

    Paths are never stored whole, so the stated budgets (2e5 paths x 201
    points) stream in constant memory.  With method=CIRCULANT an
    embed_horizon longer than the counting horizon may be given: the paths
    are sampled exactly on the longer grid (where the embedding spectrum is
    nonnegative) and counted on the first points.
    """
    if mc.step > MAX_PERSISTENCE_STEP:
        raise DomainError(
            f"persistence grids need step <= {MAX_PERSISTENCE_STEP} "
            f"(discretization-bias guard), got {mc.step}"
        )
    keep_grid = mc.grid()
    if mc.method is SampleMethod.CIRCULANT:
        sample_grid = mc.grid(mc.embed_horizon) if mc.embed_horizon else keep_grid
        block_fn = circ_block_fn(corr, sample_grid)
    elif mc.method is SampleMethod.CHOLESKY:
        block_fn = chol_block_fn(cholesky_factor(build_covariance(corr, keep_grid)))
    else:
        raise DomainError(f"simulate_survival_curve supports cholesky/circulant, got {mc.method}")
    blocks, sizes = _streamed_counts(
        block_fn, keep_grid.n_points, mc.n_paths, mc.seed, mc.level, mc.threads
    )
    return SurvivalCurve(
        horizons=keep_grid.taus[1:],
        survivors=blocks.sum(axis=0)[1:],
        n_paths=mc.n_paths,
        block_survivors=blocks[:, 1:],
        block_sizes=sizes,
    )


def estimate_exponent(corr: CorrelationFn, mc: McSettings, kappa=None):
    """Survival curve plus fitted exponent (jackknife stderr) for one correlation."""
    curve = simulate_survival_curve(corr, mc)
    est = fit_exponent(curve, FitMode.STATIONARY_LOG_T, mc.window, kappa=kappa)
    return curve, est


def rescaled_exponent(corr: CorrelationFn, kappa: float, mc: McSettings) -> ExponentEstimate:
    """Exponent of the time-rescaled process tau -> Z_{tau/kappa}.

    Equals (1/kappa) times the exponent of Z, so theta_hat estimates
    theta(Z)/kappa; the returned estimate carries kappa so callers can undo
    the scaling (theta_hat * kappa estimates theta(Z)).
    """
    rescaled = corr_rescaled(corr, kappa)
    _, est = estimate_exponent(rescaled, mc, kappa=kappa)
    return est


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def write_survival_csv(curve: SurvivalCurve, path) -> None:
    """One row per horizon: T, survivors, n, p_hat, ci_low, ci_high."""
    with open(path, "w") as fh:
        fh.write("T,survivors,n,p_hat,ci_low,ci_high\n")
        for T, k, p, lo, hi in zip(
            curve.horizons, curve.survivors, curve.p_hat, curve.ci_low, curve.ci_high
        ):
            fh.write(
                f"{T:.17g},{int(k)},{curve.n_paths},{p:.17g},{lo:.17g},{hi:.17g}\n"
            )


def write_fit_csv(fits, path) -> None:
    """One summary row per fit: mode, window, theta_hat, stderr, r2."""
    with open(path, "w") as fh:
        fh.write("mode,window_lo,window_hi,theta_hat,stderr,r_squared\n")
        for est in fits:
            fh.write(
                f"{est.mode.value},{est.window[0]:.17g},{est.window[1]:.17g},"
                f"{est.theta_hat:.17g},{est.stderr:.17g},{est.r_squared:.17g}\n"
            )
