"""Overshoot moments of a Gaussian walk crossing a level, and the Wald bracket."""

import math

from scipy.integrate import quad

from core.errors import DomainError

_ROOT_TWO_PI = math.sqrt(2.0 * math.pi)
_U_MAX = 40.0


def _check_step(step_mean: float, step_std: float) -> None:
    if step_mean < 0 or step_std < 0:
        raise DomainError(f"step_mean and step_std must be >= 0, got {step_mean}, {step_std}")
    if step_mean == 0 and step_std == 0:
        raise DomainError("degenerate step: step_mean = step_std = 0")


def gaussian_abs_moment(step_mean: float, step_std: float, order: float) -> float:
    """E|Z|^order for Z ~ N(step_mean, step_std^2), by quadrature of the folded density."""
    if step_std == 0:
        return abs(step_mean) ** order
    # Substitute z = m + sd*u; the weight is negligible beyond |u| = 40
    kink = -step_mean / step_std
    breaks = sorted({-_U_MAX, -8.0, -3.0, 0.0, 3.0, 8.0, _U_MAX} | ({kink} if abs(kink) < _U_MAX else set()))
    scale = (abs(step_mean) + step_std) ** order

    def integrand(u: float) -> float:
        return abs(step_mean + step_std * u) ** order * math.exp(-0.5 * u * u) / _ROOT_TWO_PI

    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        piece, _ = quad(integrand, lo, hi, epsabs=1e-14 * scale, epsrel=1e-12, limit=200)
        total += piece
    return total


def overshoot_moment_bound(step_mean: float, step_std: float, p: float, method: str = "auto") -> float:
    """
    Level-uniform bound on E(R^p) for the overshoot R of a walk with
    N(step_mean, step_std^2) steps:

        sup_l E(R^p) <= 2(p+2)/(p+1) * E|Z|^(p+2) / E(Z^2)

    method="closed" (p = 2 only) uses the Gaussian fourth moment,
    "quadrature" integrates E|Z|^(p+2) numerically, "auto" picks closed at p = 2.
    """
    if not p > 0:
        raise DomainError(f"p must be > 0, got {p}")
    _check_step(step_mean, step_std)
    if method not in ("auto", "closed", "quadrature"):
        raise DomainError(f"unknown method {method!r}")

    s2, v = step_mean**2, step_std**2
    if method == "closed" or (method == "auto" and p == 2):
        if p != 2:
            raise DomainError("the closed form is only available for p = 2")
        return (8.0 / 3.0) * (s2 + 5.0 * v - 2.0 * v * v / (s2 + v))

    return 2.0 * (p + 2.0) / (p + 1.0) * gaussian_abs_moment(step_mean, step_std, p + 2.0) / (s2 + v)


def overshoot_mean_bound(step_mean: float, step_std: float) -> float:
    """sup_l E(R) <= 2 s + 4 sigma."""
    _check_step(step_mean, step_std)
    return 2.0 * step_mean + 4.0 * step_std


def wald_bracket(step_mean: float, step_std: float, level: float) -> tuple[float, float]:
    """Bracket (l/s, (l + 2s + 4 sigma)/s) on the expected passage time E(mu_l)."""
    if not step_mean > 0:
        raise DomainError(f"wald_bracket needs step_mean > 0, got {step_mean}")
    if step_std < 0 or level < 0:
        raise DomainError(f"step_std and level must be >= 0, got {step_std}, {level}")
    return level / step_mean, (level + overshoot_mean_bound(step_mean, step_std)) / step_mean
