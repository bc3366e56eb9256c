from bounds.theorems import (
    best_n,
    estimate_c0,
    estimate_c1,
    eta_minus_tau_floor,
    lower_bound_brownian,
    lower_bound_discrete,
    main_term,
    regime_check,
    upper_bound_brownian,
    upper_bound_discrete,
)
from core.errors import DomainError, HypothesisError
from data.cache import get_cache
from data.models import BoundReport, HypothesesOk, LowerBoundVariant, TimeMode, WalkParams

# Global cache instance
_cache = get_cache()


def bound_report(params: WalkParams, variant: LowerBoundVariant = LowerBoundVariant.PRINTED, q: float | None = None, n: int | None = None) -> BoundReport:
    """
    Evaluate every bound that applies to params.

    Theorems whose hypotheses fail leave their field at None and add the
    reason to `failures`; nothing is raised for them. With n given, the lower
    bound is evaluated at that n instead of the best one (an out-of-range n
    raises DomainError).
    """
    key = (params.s, params.eps, params.l, params.mode.value, variant.value, q, n)
    if cached := _cache.get_bound_report(key):
        return cached

    if n is not None and params.s > 0 and not 1 <= n < params.l / params.s:
        raise DomainError(f"n must satisfy 1 ≤ n < l/s = {params.l / params.s:.6g}, got {n}")

    brownian = params.mode == TimeMode.BROWNIAN
    report = BoundReport(mode=params.mode, variant=variant)
    hypotheses = HypothesesOk()

    try:
        report.upper = upper_bound_brownian(params) if brownian else upper_bound_discrete(params)
        hypotheses.upper = True
    except DomainError as e:
        report.failures.append(str(e))

    try:
        if n is None:
            report.lower_best_n, report.lower = best_n(params, variant)
        else:
            report.lower = lower_bound_brownian(params, n, variant) if brownian else lower_bound_discrete(params, n, variant)
            report.lower_best_n = n
        hypotheses.lower = True
    except DomainError as e:
        report.failures.append(str(e))

    try:
        report.main_term = main_term(params)
        hypotheses.main_term = True
    except DomainError as e:
        report.failures.append(str(e))

    if q is not None:
        try:
            report.regime = regime_check(params, q)
        except HypothesisError as e:
            report.failures.append(str(e))

    if params.s > 0 and params.l > 0:
        report.estimate_c0 = estimate_c0(params)
        report.estimate_c1 = estimate_c1(params)
        report.eta_minus_tau_floor = eta_minus_tau_floor(params)

    report.hypotheses_ok = hypotheses
    _cache.set_bound_report(key, report)
    return report
