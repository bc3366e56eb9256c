import math
from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError
from scipy.special import ndtri
from scipy.stats import invgauss, kstest

from bounds.overshoot import overshoot_mean_bound, overshoot_moment_bound, wald_bracket
from bounds.report import bound_report
from bounds.theorems import lemma31_bounds
from core.errors import DomainError
from data.models import (
    BoundReport,
    EstimatorConfig,
    ExperimentSummary,
    KsCheckResult,
    LowerBoundVariant,
    OvershootSummary,
    PathSpec,
    SweepRow,
    TimeMode,
    TrialOutcome,
    Verdict,
    WalkParams,
)
from engine.streams import derive_seed
from montecarlo.runner import run_passages, run_trials
from utils.progress import DONE, ERROR, progress

MIN_TRIALS = 100
CENSORING_BUDGET = 0.001
# Two-sided 99% normal quantile
Z_99 = float(ndtri(0.995))
SE_MARGIN = 3.0

TRIAL_COLUMNS = ["trial_index", "tau", "eta", "abs_dev", "overshoot_x", "overshoot_xhat", "censored_tau", "censored_eta"]


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and its standard error (0 for fewer than two values)."""
    if values.size == 0:
        return math.nan, math.nan
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def trial_frame(outcomes: Sequence[TrialOutcome]) -> pd.DataFrame:
    """Per-trial table in trial-index order, columns as in the per-trial CSV."""
    rows = [
        {
            "trial_index": o.trial_index,
            "tau": o.tau,
            "eta": o.eta,
            "abs_dev": o.abs_dev,
            "overshoot_x": o.overshoot_x,
            "overshoot_xhat": o.overshoot_xhat,
            "censored_tau": o.censored_tau,
            "censored_eta": o.censored_eta,
        }
        for o in sorted(outcomes, key=lambda o: o.trial_index)
    ]
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


def classify(report: BoundReport, mean: float | None, halfwidth: float | None, censored_fraction: float) -> Verdict:
    """Compare the CI [mean - h, mean + h] with the bracket [lower, upper]."""
    if censored_fraction > CENSORING_BUDGET:
        return Verdict.INVALID_CENSORING
    if mean is None or (report.lower is None and report.upper is None):
        return Verdict.NOT_APPLICABLE
    h = halfwidth or 0.0
    if report.lower is not None and mean - h < report.lower:
        return Verdict.BELOW_LOWER
    if report.upper is not None and mean + h > report.upper:
        return Verdict.ABOVE_UPPER
    return Verdict.INSIDE_BRACKET


def summarize_trials(params: WalkParams, est: EstimatorConfig, outcomes: Sequence[TrialOutcome], variant: LowerBoundVariant = LowerBoundVariant.PRINTED) -> ExperimentSummary:
    """Aggregate the uncensored trials and attach bounds and verdict."""
    n_trials = len(outcomes)
    frame = trial_frame(outcomes)
    censored = (frame["censored_tau"] | frame["censored_eta"]).to_numpy()
    n_censored = int(censored.sum())
    censored_fraction = n_censored / n_trials if n_trials else 0.0

    kept = frame.loc[~censored]
    stats: dict[str, Any] = {}
    if len(kept):
        tau = kept["tau"].to_numpy(dtype=float)
        dev = kept["eta"].to_numpy(dtype=float) - tau
        abs_dev = np.abs(dev)
        overshoot = kept["overshoot_x"].to_numpy(dtype=float)
        m = len(kept)
        std_abs = float(abs_dev.std(ddof=1)) if m > 1 else 0.0
        std_dev = float(dev.std(ddof=1)) if m > 1 else 0.0
        stats = {
            "mean_abs_dev": float(abs_dev.mean()),
            "std_abs_dev": std_abs,
            "ci_halfwidth_abs_dev": Z_99 * std_abs / math.sqrt(m),
            "mean_dev": float(dev.mean()),
            "ci_halfwidth_mean_dev": Z_99 * std_dev / math.sqrt(m),
            "mean_pos_dev": float(np.maximum(dev, 0.0).mean()),
            "prob_eta_early": float((dev < 0).mean()),
            "mean_overshoot": float(overshoot.mean()),
            "mean_sq_overshoot": float((overshoot**2).mean()),
            "mean_tau": float(tau.mean()),
        }

    report = bound_report(params, variant)
    verdict = classify(report, stats.get("mean_abs_dev"), stats.get("ci_halfwidth_abs_dev"), censored_fraction)
    return ExperimentSummary(
        params=params,
        c=est.c,
        n_trials=n_trials,
        n_censored=n_censored,
        censored_fraction=censored_fraction,
        bound_report=report,
        verdict=verdict,
        **stats,
    )


def run_experiment(
    params: WalkParams,
    est: EstimatorConfig,
    n_trials: int,
    master_seed: int,
    threads: int | None = 1,
    variant: LowerBoundVariant = LowerBoundVariant.PRINTED,
    task_name: str = "run_experiment",
) -> ExperimentSummary:
    """Simulate trials 0..n_trials-1 and summarize them against the bound bracket."""
    if n_trials < MIN_TRIALS:
        raise DomainError(f"n_trials must be >= {MIN_TRIALS}, got {n_trials}")
    if est.eps != params.eps:
        raise DomainError(f"estimator eps {est.eps} does not match walk eps {params.eps}")
    outcomes = run_trials(params, est, n_trials, master_seed, threads, task_name)
    return summarize_trials(params, est, outcomes, variant)


##### Sweeps #####
def _grid_point(point: Mapping[str, Any] | Sequence[Any]) -> dict[str, Any]:
    """Normalize a grid entry: an (l, s, eps, c) tuple or a mapping with those keys."""
    if isinstance(point, Mapping):
        values = dict(point)
    else:
        if len(point) != 4:
            raise DomainError(f"grid tuples must be (l, s, eps, c), got {point!r}")
        values = dict(zip(("l", "s", "eps", "c"), point))
    values.setdefault("c", "auto")
    values.setdefault("mode", TimeMode.DISCRETE)
    return values


def _sweep_row(row_index: int, point: Mapping[str, Any] | Sequence[Any], n_trials: int, master_seed: int, threads: int | None, variant: LowerBoundVariant) -> SweepRow:
    values = _grid_point(point)
    row = SweepRow(
        row_index=row_index,
        l=float(values.get("l", math.nan)),
        s=float(values.get("s", math.nan)),
        eps=float(values.get("eps", math.nan)),
        mode=TimeMode(values["mode"]),
    )
    params = WalkParams(s=values["s"], eps=values["eps"], l=values["l"], mode=values["mode"], dt=values.get("dt", 1.0), t_max=values.get("t_max"), bridge=values.get("bridge", True))
    c = values["c"]
    est = EstimatorConfig.optimal(params.eps) if c in ("auto", None) else EstimatorConfig(c=c, eps=params.eps)
    row.c = est.c

    summary = run_experiment(params, est, n_trials, derive_seed(master_seed, row_index), threads, variant, task_name="sweep_row")
    row.summary = summary
    main = summary.bound_report.main_term
    if main and summary.mean_abs_dev is not None:
        row.ratio_to_main_term = summary.mean_abs_dev / main
    return row


def sweep(grid: Sequence[Mapping[str, Any] | Sequence[Any]], n_trials: int, master_seed: int, threads: int | None = 1, variant: LowerBoundVariant = LowerBoundVariant.PRINTED) -> list[SweepRow]:
    """
    Run one experiment per grid entry, in grid order.

    Row i uses a seed derived from (master_seed, i). A row whose parameters
    are invalid records the error and the sweep moves on.
    """
    if not grid:
        raise DomainError("sweep grid must not be empty")

    rows: list[SweepRow] = []
    progress.begin("sweep", None, len(grid), unit="rows")
    for row_index, point in enumerate(grid):
        try:
            rows.append(_sweep_row(row_index, point, n_trials, master_seed, threads, variant))
        except (DomainError, ValidationError, KeyError, TypeError, ValueError) as e:
            # One line per row so the message fits a CSV cell
            message = " ".join(str(e).split())
            progress.update_status("sweep_row", f"row {row_index}", f"{ERROR}: {message}")
            values = point if isinstance(point, Mapping) else dict(zip(("l", "s", "eps", "c"), point))
            rows.append(SweepRow(row_index=row_index, l=_as_float(values.get("l")), s=_as_float(values.get("s")), eps=_as_float(values.get("eps")), error=message))
        progress.advance("sweep", row_index + 1)
    progress.update_status("sweep", status=DONE)
    return rows


def _as_float(value: Any) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        return math.nan


##### Overshoot and passage-time checks #####
def summarize_overshoot(spec: PathSpec, n_trials: int, master_seed: int, horizon: int | None = None, threads: int | None = 1) -> OvershootSummary:
    """
    Empirical overshoot moments and passage time of S_t = step_mean t + step_std sum Z_i
    over spec.level, checked against the level-uniform overshoot bounds and
    the Wald bracket (each with a 3-SE margin).
    """
    if not spec.step_mean > 0:
        raise DomainError(f"summarize_overshoot needs step_mean > 0, got {spec.step_mean}")
    if n_trials < 1:
        raise DomainError(f"n_trials must be >= 1, got {n_trials}")

    passages = run_passages(spec, n_trials, master_seed, horizon=horizon, threads=threads, task_name="overshoot")
    kept = [p for p in passages if not p.censored]
    if not kept:
        raise DomainError("every passage was censored; raise the horizon")
    overshoot = np.array([p.overshoot for p in kept])
    time = np.array([p.time for p in kept])

    s, level = spec.step_mean, spec.level
    time_dev = s * time - level
    # S_mu - s mu = (l + R) - s mu
    noise = level + overshoot - s * time

    mean_r, se_r = _mean_se(overshoot)
    mean_r2, se_r2 = _mean_se(overshoot**2)
    mean_t, se_t = _mean_se(time)
    mean_abs, se_abs = _mean_se(np.abs(time_dev))
    mean_pos, se_pos = _mean_se(np.maximum(time_dev, 0.0))
    mean_noise, se_noise = _mean_se(np.maximum(noise, 0.0))

    mean_bound = overshoot_mean_bound(s, spec.step_std)
    moment_bound = overshoot_moment_bound(s, spec.step_std, 2.0)
    low, high = wald_bracket(s, spec.step_std, level)

    lemma_bounds = lemma_ok = None
    if spec.step_std == 1.0 and level > 0:
        lemma_bounds = lemma31_bounds(WalkParams(s=s, eps=0.0, l=level))
        lemma_ok = bool(
            mean_pos <= lemma_bounds[0] + SE_MARGIN * se_pos
            and mean_abs <= lemma_bounds[1] + SE_MARGIN * se_abs
            and mean_noise <= lemma_bounds[2] + SE_MARGIN * se_noise
        )

    return OvershootSummary(
        spec=spec,
        n_trials=n_trials,
        n_censored=n_trials - len(kept),
        mean_overshoot=mean_r,
        se_overshoot=se_r,
        mean_sq_overshoot=mean_r2,
        se_sq_overshoot=se_r2,
        mean_time=mean_t,
        se_time=se_t,
        mean_bound=mean_bound,
        moment_bound=moment_bound,
        wald_bracket=(low, high),
        mean_ok=mean_r <= mean_bound + SE_MARGIN * se_r,
        moment_ok=mean_r2 <= moment_bound + SE_MARGIN * se_r2,
        wald_ok=low - SE_MARGIN * se_t <= mean_t <= high + SE_MARGIN * se_t,
        mean_abs_time_dev=mean_abs,
        se_abs_time_dev=se_abs,
        mean_pos_time_dev=mean_pos,
        se_pos_time_dev=se_pos,
        mean_pos_noise=mean_noise,
        se_pos_noise=se_noise,
        lemma_bounds=lemma_bounds,
        lemma_ok=lemma_ok,
    )


def inverse_gaussian_check(params: WalkParams, n_trials: int, master_seed: int, threads: int | None = 1) -> KsCheckResult:
    """
    Kolmogorov-Smirnov distance between simulated Brownian passage times of
    X_t = s t + B_t over l and the inverse-Gaussian law (mean l/s, shape l^2).
    """
    if params.mode != TimeMode.BROWNIAN:
        raise DomainError("inverse_gaussian_check needs brownian mode")
    if not params.s > 0 or not params.l > 0:
        raise DomainError(f"inverse_gaussian_check needs s > 0 and l > 0, got s={params.s}, l={params.l}")

    spec = PathSpec(step_mean=params.s, step_std=1.0, level=params.l)
    passages = run_passages(spec, n_trials, master_seed, horizon=params.t_max, dt=params.dt, threads=threads, task_name="inverse_gaussian", bridge=params.bridge)
    taus = np.array([p.time for p in passages if not p.censored])
    if taus.size == 0:
        raise DomainError("every passage was censored; raise t_max")

    mean, shape = params.l / params.s, params.l**2
    # scipy parametrizes IG(mean, shape) as invgauss(mean / shape, scale=shape)
    law = invgauss(mean / shape, scale=shape)
    result = kstest(taus, law.cdf)
    return KsCheckResult(
        statistic=float(result.statistic),
        n=int(taus.size),
        n_censored=n_trials - int(taus.size),
        mean_tau=float(taus.mean()),
        oracle_mean=mean,
    )
