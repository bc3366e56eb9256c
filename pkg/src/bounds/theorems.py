"""Closed-form bounds on inf E|eta - tau_l| for the walk and the Brownian setting."""

import math

import numpy as np

from core.errors import DomainError, HypothesisError
from core.model import gaussian_tail
from data.models import LowerBoundVariant, RegimeCheck, TimeMode, WalkParams

UPPER_DISCRETE = "Theorem 1 (upper bound, discrete)"
LOWER_DISCRETE = "Theorem 2 (lower bound, discrete)"
ASYMPTOTICS = "Theorem 3 (asymptotics)"
UPPER_BROWNIAN = "Theorem 4 (upper bound, Brownian)"
LOWER_BROWNIAN = "Theorem 5 (lower bound, Brownian)"


def _require_positive(theorem: str, params: WalkParams) -> None:
    if not params.eps > 0:
        raise HypothesisError(theorem, "ε > 0")
    if not params.s > 0:
        raise HypothesisError(theorem, "s > 0")
    if not params.l > 0:
        raise HypothesisError(theorem, "l > 0")


def main_term(params: WalkParams) -> float:
    """Leading asymptotic value sqrt(2 l eps^2 / (pi s^3 (1 + eps^2)))."""
    _require_positive(ASYMPTOTICS, params)
    s, eps, l = params.s, params.eps, params.l
    return math.sqrt(2.0 * l * eps**2 / (math.pi * (1.0 + eps**2) * s**3))


def _upper_core(params: WalkParams) -> float:
    s, l = params.s, params.l
    return main_term(params) + (6.0 / s) * (l / (2.0 * math.pi * s) ** 3) ** 0.25


def upper_bound_discrete(params: WalkParams) -> float:
    _require_positive(UPPER_DISCRETE, params)
    s = params.s
    return _upper_core(params) + math.sqrt(8.0 * (s + 2.0) / (math.pi * s**3)) + 10.0 + 20.0 / s


def upper_bound_brownian(params: WalkParams) -> float:
    _require_positive(UPPER_BROWNIAN, params)
    return _upper_core(params)


def _check_n(theorem: str, params: WalkParams, n: int) -> None:
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"n must be an integer, got {n!r}")
    n_max = math.ceil(params.l / params.s) - 1
    if not 1 <= n < params.l / params.s:
        raise DomainError(f"{theorem}: n must lie in [1, {n_max}] (1 <= n < l/s), got {n}")


def _lower_core(params: WalkParams, n, variant: LowerBoundVariant):
    # Vectorized over n so the best-n scan is one numpy pass
    s, eps, l = params.s, params.eps, params.l
    n = np.asarray(n, dtype=float)
    spread = (1.0 + eps) if variant == LowerBoundVariant.PRINTED else (1.0 + eps**2)
    deficit = l - s * n
    head = np.sqrt(2.0 * n * eps**2 / (math.pi * s**2 * (1.0 + eps**2))) * (1.0 - gaussian_tail(deficit / np.sqrt(n * spread)))
    return head - math.sqrt(2.0 / (math.pi * s**3)) * np.sqrt(deficit + np.sqrt(n / (2.0 * math.pi)))


def _discrete_constant(s: float) -> float:
    return 2.0 + 4.0 / s


def lower_bound_discrete(params: WalkParams, n: int, variant: LowerBoundVariant = LowerBoundVariant.PRINTED) -> float:
    """Lower bound on E|eta - tau| over all Y-measurable estimates, for one n."""
    _require_positive(LOWER_DISCRETE, params)
    if params.l / params.s < 2:
        raise HypothesisError(LOWER_DISCRETE, f"l/s ≥ 2 (got l/s = {params.l / params.s:.6g})")
    _check_n(LOWER_DISCRETE, params, n)
    return float(_lower_core(params, n, variant)) - _discrete_constant(params.s)


def lower_bound_brownian(params: WalkParams, n: int, variant: LowerBoundVariant = LowerBoundVariant.PRINTED) -> float:
    _require_positive(LOWER_BROWNIAN, params)
    _check_n(LOWER_BROWNIAN, params, n)
    return float(_lower_core(params, n, variant))


def best_n(params: WalkParams, variant: LowerBoundVariant = LowerBoundVariant.PRINTED) -> tuple[int, float]:
    """
    Exhaustive scan of n in {1, ..., ceil(l/s) - 1}; returns the maximizing n
    (smallest on ties) and the lower bound there. Uses the theorem matching
    params.mode.
    """
    if params.mode == TimeMode.BROWNIAN:
        theorem, evaluate, offset = LOWER_BROWNIAN, lower_bound_brownian, 0.0
    else:
        theorem, evaluate, offset = LOWER_DISCRETE, lower_bound_discrete, _discrete_constant(params.s) if params.s > 0 else 0.0
    _require_positive(theorem, params)
    if theorem == LOWER_DISCRETE and params.l / params.s < 2:
        raise HypothesisError(theorem, f"l/s ≥ 2 (got l/s = {params.l / params.s:.6g})")
    n_max = math.ceil(params.l / params.s) - 1
    if n_max < 1:
        raise HypothesisError(theorem, f"an integer n with 1 ≤ n < l/s (got l/s = {params.l / params.s:.6g})")

    candidates = np.arange(1, n_max + 1)
    values = _lower_core(params, candidates, variant) - offset
    idx = int(np.argmax(values))
    n = int(candidates[idx])
    return n, evaluate(params, n, variant)


def regime_check(params: WalkParams, q: float) -> RegimeCheck:
    """
    The two quantities that must diverge for the asymptotic equality:
    s (l/s)^(q - 1/2) and (l/s)^(1 - q) eps^2/(1 + eps^2), plus the flag l/s >= 2.
    """
    if not 0.5 < q < 1.0:
        raise DomainError(f"q must lie in (1/2, 1), got {q}")
    _require_positive(ASYMPTOTICS, params)
    ratio = params.l / params.s
    return RegimeCheck(
        q=q,
        drift_regime=params.s * ratio ** (q - 0.5),
        noise_regime=ratio ** (1.0 - q) * params.eps**2 / (1.0 + params.eps**2),
        ratio_ok=ratio >= 2.0,
    )


def lemma31_bounds(params: WalkParams) -> tuple[float, float, float]:
    """
    Bounds on E(s tau - l)_+, E|s tau - l| and E(X_tau - s tau)_+ for the
    unit-variance walk.
    """
    s, l = params.s, params.l
    if not s > 0 or not l > 0:
        raise DomainError(f"lemma31_bounds needs s > 0 and l > 0, got s={s}, l={l}")
    radical = math.sqrt(l / (2.0 * math.pi * s))
    return (
        radical + s + 2.0,
        math.sqrt(2.0 * l / (math.pi * s)) + 2.0 * s + 4.0,
        radical + 3.0 * s + 6.0,
    )


##### Diagnostic bounds for the two extreme tracking coefficients #####
def estimate_c0(params: WalkParams) -> float:
    """Bound on E|eta^(0) - tau| for the deterministic rule eta^(0) = l/s."""
    s, l = params.s, params.l
    if not s > 0 or not l > 0:
        raise DomainError(f"estimate_c0 needs s > 0 and l > 0, got s={s}, l={l}")
    return math.sqrt(2.0 * l / (math.pi * s**3)) + 2.0 + 4.0 / s


def estimate_c1(params: WalkParams) -> float:
    """Bound on E|eta^(1) - tau| for eta^(1), the first passage of Y itself."""
    s, l, eps = params.s, params.l, params.eps
    if not s > 0 or not l > 0:
        raise DomainError(f"estimate_c1 needs s > 0 and l > 0, got s={s}, l={l}")
    return 2.0 * eps * math.sqrt(l + 2.0 * s + 4.0) / math.sqrt(2.0 * math.pi * s**3) + 4.0 * (s + 1.0 + math.sqrt(1.0 + eps**2)) / s


def eta_minus_tau_floor(params: WalkParams) -> float:
    """Lower bound -(2s + 4)/s on E(eta^(c) - tau), valid for every c >= 0."""
    if not params.s > 0:
        raise DomainError(f"eta_minus_tau_floor needs s > 0, got s={params.s}")
    return -(2.0 * params.s + 4.0) / params.s
