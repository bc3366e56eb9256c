import math

import numpy as np
from scipy.special import erfc

from core.errors import DomainError

# Horizon multiplier: tau concentrates near l/s with O(sqrt(l/s^3)) fluctuations
T_MAX_MULTIPLIER = 50
T_MAX_DRIFTLESS = 1_000_000


def gaussian_tail(x):
    """
    Standard Gaussian tail Q(x) = P(N(0,1) > x).

    Accepts a scalar or a numpy array. Computed through the complementary
    error function, which keeps full double precision deep in both tails.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"gaussian_tail needs a finite argument, got {x!r}")

    q = 0.5 * erfc(arr / math.sqrt(2.0))
    if q.ndim == 0:
        return float(q)
    return q


def optimal_c(eps: float) -> float:
    """Tracking coefficient minimizing the per-step variance of X - X_hat."""
    _check_non_negative("eps", eps)
    return 1.0 / (1.0 + eps * eps)


def variance_factor(c: float, eps: float) -> float:
    """Per-step variance of X - X_hat^(c): (1-c)^2 + c^2 eps^2."""
    _check_non_negative("c", c)
    _check_non_negative("eps", eps)
    return (1.0 - c) ** 2 + c * c * eps * eps


def default_t_max(s: float, l: float, step: float = 1.0) -> int:
    """Horizon cap in steps; large enough that censoring is negligible when s > 0."""
    if s > 0:
        return int(math.ceil(T_MAX_MULTIPLIER * l / (s * step))) + 100
    return T_MAX_DRIFTLESS


def _check_non_negative(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be a finite real >= 0, got {value!r}")
