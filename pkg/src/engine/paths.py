import math

import numpy as np

from core.errors import DomainError
from core.model import T_MAX_DRIFTLESS, default_t_max
from data.models import EstimatorConfig, NoiseStream, PassageResult, PathSpec, StreamRole, TimeMode, TrialOutcome, WalkParams
from engine.streams import generator, make_stream, open_uniforms, standard_normals

# Extra standard deviations of passage time covered by the first block of steps
_BLOCK_SIGMAS = 6.0
_BLOCK_PAD = 16
_DRIFTLESS_BLOCK = 4096


def brownian_bridge_crossing_prob(a, b, level, dt, sigma2):
    """
    Probability that a Brownian bridge from a to b over a step of length dt
    (variance sigma2 per unit time) reaches `level` inside the step.

    Works elementwise on numpy arrays. Steps with an endpoint at or above the
    level have already crossed and get probability 1.
    """
    if np.any(np.asarray(dt) <= 0):
        raise DomainError(f"dt must be > 0, got {dt!r}")
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2!r}")

    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    gap = np.maximum((level - a_arr) * (level - b_arr), 0.0)
    prob = np.exp(-2.0 * gap / (sigma2 * np.asarray(dt, dtype=float)))
    prob = np.where((a_arr >= level) | (b_arr >= level), 1.0, prob)
    if prob.ndim == 0:
        return float(prob)
    return prob


def _cumulate(carry: float, increments: np.ndarray) -> np.ndarray:
    # Sequential sums continued from the carry, bit-identical to one long cumsum
    return np.cumsum(np.concatenate(([carry], increments)))[1:]


def _first_hit(values: np.ndarray, previous: float, level: float, step: float, sigma2: float, uniforms: np.ndarray | None) -> int:
    """Index of the first grid step whose path (or bridge) reaches the level, -1 if none."""
    hits = values >= level
    if uniforms is not None and sigma2 > 0:
        prev = np.concatenate(([previous], values[:-1]))
        hits |= uniforms < brownian_bridge_crossing_prob(prev, values, level, step, sigma2)
    if not hits.any():
        return -1
    return int(np.argmax(hits))


def _first_block(drift: float, level: float, step: float, sigma2: float) -> int:
    if drift <= 0:
        return _DRIFTLESS_BLOCK
    mean_steps = level / (drift * step)
    sd_steps = math.sqrt(level * max(sigma2, 1.0) / drift**3) / step
    return int(math.ceil(mean_steps + _BLOCK_SIGMAS * sd_steps)) + _BLOCK_PAD


def _validate_trial(params: WalkParams, est: EstimatorConfig) -> None:
    if not isinstance(params, WalkParams):
        raise DomainError(f"params must be WalkParams, got {type(params).__name__}")
    if est.c < 0:
        raise DomainError(f"tracking coefficient c must be >= 0, got {est.c}")


def sample_trial(params: WalkParams, est: EstimatorConfig, master_seed: int, trial_index: int) -> TrialOutcome:
    """
    Simulate tau (crossing of X) and eta (crossing of X_hat^(c)) on one shared
    noise realization.

    X_t = s t + sum V_i, X_hat_t = s t + c (sum V_i + eps sum W_i). Each clock
    stops at its own first passage over l or at t_max (censored).
    """
    _validate_trial(params, est)
    level = params.l
    if level <= 0:
        return TrialOutcome(trial_index=trial_index, tau=0.0, eta=0.0)

    s, eps, c = params.s, params.eps, est.c
    step = params.step
    root = math.sqrt(step)
    brownian = params.mode == TimeMode.BROWNIAN
    bridged = brownian and params.bridge
    xhat_sigma2 = c * c * (1.0 + eps * eps)
    need_w = c > 0 and eps > 0
    # X_hat coincides with X pathwise: share the bridge draws too
    mirror = eps == 0 and c == 1

    gen_v = generator(make_stream(master_seed, trial_index, StreamRole.V))
    gen_w = generator(make_stream(master_seed, trial_index, StreamRole.W)) if need_w else None
    gen_bx = generator(make_stream(master_seed, trial_index, StreamRole.BRIDGE_X)) if bridged else None
    gen_bxhat = generator(make_stream(master_seed, trial_index, StreamRole.BRIDGE_XHAT)) if bridged and not mirror else None

    cum_v = cum_w = 0.0
    x_prev = xhat_prev = 0.0
    tau = eta = None
    overshoot_x = overshoot_xhat = 0.0
    done = 0
    block = _first_block(s, level, step, max(1.0, xhat_sigma2))

    while done < params.t_max and (tau is None or eta is None):
        n = min(block, params.t_max - done)
        t = np.arange(done + 1, done + n + 1, dtype=float) * step
        drift = s * t

        cv = _cumulate(cum_v, standard_normals(gen_v, n))
        cw = _cumulate(cum_w, standard_normals(gen_w, n)) if gen_w is not None else None
        cum_v = float(cv[-1])
        if cw is not None:
            cum_w = float(cw[-1])

        noise_x = root * cv
        x = drift + noise_x
        noise_w = eps * root * cw if cw is not None else 0.0
        xhat = drift + c * (noise_x + noise_w)

        u_x = open_uniforms(gen_bx, n) if gen_bx is not None and tau is None else None
        if tau is None:
            idx = _first_hit(x, x_prev, level, step, 1.0, u_x)
            if idx >= 0:
                tau = float(t[idx])
                overshoot_x = 0.0 if brownian else float(x[idx] - level)
        if eta is None:
            if mirror:
                u_hat = u_x
            else:
                u_hat = open_uniforms(gen_bxhat, n) if gen_bxhat is not None else None
            idx = _first_hit(xhat, xhat_prev, level, step, xhat_sigma2, u_hat)
            if idx >= 0:
                eta = float(t[idx])
                overshoot_xhat = 0.0 if brownian else float(xhat[idx] - level)

        x_prev, xhat_prev = float(x[-1]), float(xhat[-1])
        done += n
        block *= 2

    return TrialOutcome(
        trial_index=trial_index,
        tau=params.horizon if tau is None else tau,
        eta=params.horizon if eta is None else eta,
        overshoot_x=overshoot_x,
        overshoot_xhat=overshoot_xhat,
        censored_tau=tau is None,
        censored_eta=eta is None,
    )


def first_passage(spec: PathSpec, noise: NoiseStream, horizon: int | None = None, dt: float | None = None, bridge: bool = True) -> PassageResult:
    """
    First passage mu_l = inf{t >= 0: S_t >= l} of S_t = step_mean t + step_std sum Z_i
    and the overshoot S_mu - l, on one seeded realization.

    With dt given, the walk is a Brownian motion observed on a grid of step dt
    (overshoot reported as 0), optionally refined by bridge sampling.
    """
    if spec.level <= 0:
        return PassageResult(time=0.0, overshoot=0.0, censored=False, steps=0)
    if horizon is None:
        if spec.step_mean < 0:
            raise DomainError("negative step_mean needs an explicit horizon")
        if spec.step_mean == 0 and spec.step_std == 0:
            raise DomainError("a walk with zero mean and zero spread never crosses a positive level")
    if dt is not None and dt <= 0:
        raise DomainError(f"dt must be > 0, got {dt}")

    step = 1.0 if dt is None else float(dt)
    if horizon is None:
        horizon = default_t_max(spec.step_mean, spec.level, step) if spec.step_mean > 0 else T_MAX_DRIFTLESS
    root = math.sqrt(step)
    sigma2 = spec.step_std**2
    brownian = dt is not None

    gen_z = generator(noise)
    gen_u = generator(make_stream(noise.master_seed, noise.trial_index, StreamRole.BRIDGE_X)) if brownian and bridge and sigma2 > 0 else None

    carry, prev = 0.0, 0.0
    done = 0
    block = _first_block(spec.step_mean, spec.level, step, sigma2)
    while done < horizon:
        n = min(block, horizon - done)
        t = np.arange(done + 1, done + n + 1, dtype=float) * step
        cz = _cumulate(carry, standard_normals(gen_z, n))
        carry = float(cz[-1])
        values = spec.step_mean * t + spec.step_std * root * cz
        uniforms = open_uniforms(gen_u, n) if gen_u is not None else None
        idx = _first_hit(values, prev, spec.level, step, sigma2, uniforms)
        if idx >= 0:
            overshoot = 0.0 if brownian else float(values[idx] - spec.level)
            return PassageResult(time=float(t[idx]), overshoot=overshoot, censored=False, steps=done + idx + 1)
        prev = float(values[-1])
        done += n
        block *= 2

    return PassageResult(time=horizon * step, overshoot=0.0, censored=True, steps=horizon)


def passage_over_grid(times: np.ndarray, level: float, drift: float, sigma2: float, normals: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """
    First passage of drift*t + sqrt(sigma2)*B_t over `level`, for a batch of
    paths observed on an increasing time grid (rows = paths).

    Bridge sampling in every interval makes the crossing indicator exact at
    grid points for any spacing. Returns the grid time of the first crossing,
    np.inf for paths that never cross on the grid.
    """
    times = np.asarray(times, dtype=float)
    steps = np.diff(np.concatenate(([0.0], times)))
    if np.any(steps <= 0):
        raise DomainError("time grid must be strictly increasing and positive")

    values = drift * times + math.sqrt(sigma2) * np.cumsum(normals * np.sqrt(steps), axis=1)
    prev = np.concatenate((np.zeros((values.shape[0], 1)), values[:, :-1]), axis=1)
    hits = (values >= level) | (uniforms < brownian_bridge_crossing_prob(prev, values, level, steps, sigma2))

    first = np.argmax(hits, axis=1)
    crossed = hits[np.arange(hits.shape[0]), first]
    return np.where(crossed, times[first], np.inf)
