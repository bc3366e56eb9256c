"""
Survival tail of driftless Brownian first passages.

P(tau_h > t) = 1 - 2Q(h / sqrt(t)) decays like sqrt(2/pi) h t^(-1/2), so
E(tau_h^r) is infinite for r >= 1/2 and no estimate tracks tau with a finite
moment of that order. The experiment samples tau_h on a grid that is fine
near 0 and geometric afterwards; bridge sampling in every interval keeps the
survival exact at grid points.
"""

import math
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.stats import linregress

from core.errors import DomainError
from core.model import gaussian_tail
from data.models import StreamRole, TailCheckResult
from engine.paths import passage_over_grid
from engine.streams import generator, make_stream, open_uniforms, standard_normals
from montecarlo.runner import check_seed, chunk_ranges, map_chunks, resolve_threads

# Survivors needed at the last checkpoint before the fit is trusted
MIN_SURVIVORS = 100
MIN_FIT_POINTS = 5
_BATCH = 256


def time_grid(checkpoints: Sequence[float], dt: float = 0.01, fine_horizon: float = 1.0, growth: float = 1.01) -> np.ndarray:
    """Steps of dt up to fine_horizon, then geometric with ratio growth; every checkpoint is a grid point."""
    if not dt > 0 or not fine_horizon > 0 or not growth > 1:
        raise DomainError(f"need dt > 0, fine_horizon > 0 and growth > 1, got {dt}, {fine_horizon}, {growth}")
    end = float(checkpoints[-1])
    fine = np.arange(1, int(math.floor(min(fine_horizon, end) / dt)) + 1) * dt
    start = fine[-1] if fine.size else dt
    n_geometric = max(int(math.ceil(math.log(max(end / start, 1.0)) / math.log(growth))), 0)
    coarse = start * growth ** np.arange(1, n_geometric + 1)
    grid = np.unique(np.concatenate((fine, coarse, np.asarray(checkpoints, dtype=float))))
    return grid[grid <= end]


def tail_chunk(h: float, times: np.ndarray, master_seed: int, start: int, stop: int) -> list[float]:
    """Grid passage times of trials start..stop-1 (inf when the level is never reached)."""
    results: list[float] = []
    n_points = times.size
    for lo in range(start, stop, _BATCH):
        hi = min(lo + _BATCH, stop)
        normals = np.empty((hi - lo, n_points))
        uniforms = np.empty((hi - lo, n_points))
        for row, i in enumerate(range(lo, hi)):
            normals[row] = standard_normals(generator(make_stream(master_seed, i, StreamRole.V)), n_points)
            uniforms[row] = open_uniforms(generator(make_stream(master_seed, i, StreamRole.BRIDGE_X)), n_points)
        results.extend(passage_over_grid(times, h, 0.0, 1.0, normals, uniforms).tolist())
    return results


def survival_oracle(h: float, t) -> np.ndarray:
    """Reflection law P(tau_h > t) = 1 - 2Q(h / sqrt(t))."""
    t = np.asarray(t, dtype=float)
    return 1.0 - 2.0 * gaussian_tail(h / np.sqrt(t))


def truncated_sqrt_oracle(h: float, horizon: float) -> float:
    """E sqrt(min(tau_h, H)) = integral over u in [0, sqrt(H)] of P(tau_h > u^2)."""

    def integrand(u: float) -> float:
        return 0.0 if u == 0 else float(survival_oracle(h, u * u))

    value, _ = quad(integrand, 0.0, math.sqrt(horizon), limit=200)
    return value


def _fit_slope(checkpoints: np.ndarray, survival: np.ndarray, n_trials: int) -> tuple[float, float, tuple[float, float]]:
    """Least-squares slope of log survival on log t over the last decade of checkpoints."""
    last = checkpoints[-1]
    window = (checkpoints >= last / 10.0) & (survival > 0)
    if window.sum() < MIN_FIT_POINTS:
        raise DomainError(f"the last decade of checkpoints holds {int(window.sum())} usable points, need at least {MIN_FIT_POINTS}")

    t, p = checkpoints[window], survival[window]
    fit = linregress(np.log(t), np.log(p))
    # Binomial noise of the two ends, carried through the log transform
    var_ends = (1.0 - p[0]) / (n_trials * p[0]) + (1.0 - p[-1]) / (n_trials * p[-1])
    binomial_stderr = math.sqrt(var_ends) / math.log(t[-1] / t[0])
    return float(fit.slope), max(float(fit.stderr), binomial_stderr), (float(t[0]), float(t[-1]))


def tail_exponent_estimate(
    h: float,
    n_trials: int,
    checkpoints: Sequence[float],
    master_seed: int,
    dt: float = 0.01,
    fine_horizon: float = 1.0,
    growth: float = 1.01,
    threads: int | None = 1,
) -> TailCheckResult:
    """
    Simulate driftless passages over h (truncated at the last checkpoint) and
    fit the survival exponent; also reports the truncated E sqrt(tau) against
    its closed form.
    """
    if not h > 0:
        raise DomainError(f"h must be > 0, got {h}")
    if n_trials < 1:
        raise DomainError(f"n_trials must be >= 1, got {n_trials}")
    check_seed(master_seed)
    cps = np.asarray(checkpoints, dtype=float)
    if cps.size == 0 or np.any(cps <= 0) or np.any(np.diff(cps) <= 0):
        raise DomainError("checkpoints must be positive and strictly increasing")

    grid = time_grid(cps.tolist(), dt, fine_horizon, growth)
    jobs = [(h, grid, master_seed, start, stop) for start, stop in chunk_ranges(n_trials, resolve_threads(threads))]
    taus = np.asarray(map_chunks(tail_chunk, jobs, threads, "tail_check", f"h={h:g}"), dtype=float)

    survival = np.array([(taus > t).mean() for t in cps])
    oracle = survival_oracle(h, cps)
    se = np.sqrt(oracle * (1.0 - oracle) / n_trials)
    within = np.abs(survival - oracle) <= 3.0 * se

    slope, slope_stderr, window = _fit_slope(cps, survival, n_trials)
    low_survivors = bool((taus > cps[-1]).sum() < MIN_SURVIVORS)
    if low_survivors:
        slope_stderr *= 2.0

    truncated = [float(np.sqrt(np.minimum(taus, t)).mean()) for t in cps]
    return TailCheckResult(
        h=h,
        n_trials=n_trials,
        times=cps.tolist(),
        survival=survival.tolist(),
        survival_oracle=oracle.tolist(),
        survival_se=se.tolist(),
        within_3se=within.tolist(),
        slope=slope,
        slope_stderr=slope_stderr,
        fit_window=window,
        low_survivors=low_survivors,
        truncated_sqrt_mean=truncated,
        truncated_sqrt_oracle=[truncated_sqrt_oracle(h, t) for t in cps],
    )
