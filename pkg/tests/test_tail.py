import math

import numpy as np
import pytest

from core.errors import DomainError
from montecarlo.tail import survival_oracle, tail_exponent_estimate, time_grid, truncated_sqrt_oracle

SEED = 31337
# Five checkpoints per decade
CHECKPOINTS = np.geomspace(1.0, 100.0, 11).tolist()


def test_survival_oracle():
    assert survival_oracle(1.0, 1.0) == pytest.approx(0.6826894921370859, rel=1e-12)
    values = survival_oracle(1.0, [1.0, 10.0, 100.0])
    assert np.all(np.diff(values) < 0)
    # sqrt(2/pi) h t^(-1/2) for large t
    assert survival_oracle(1.0, 1e8) == pytest.approx(math.sqrt(2 / math.pi) * 1e-4, rel=1e-6)


def test_truncated_sqrt_oracle_grows_without_bound():
    values = [truncated_sqrt_oracle(1.0, h) for h in (1e2, 1e3, 1e4, 1e5)]
    steps = np.diff(values)
    assert np.all(steps > 0)
    # Logarithmic growth: equal increments per decade
    assert steps[-1] == pytest.approx(math.sqrt(2 / math.pi) * math.log(10) / 2, rel=0.01)


def test_time_grid():
    grid = time_grid([1.0, 5.0, 50.0], dt=0.1, fine_horizon=1.0, growth=1.1)
    assert grid[0] == pytest.approx(0.1)
    assert np.all(np.diff(grid) > 0)
    assert grid[-1] == 50.0
    for checkpoint in (1.0, 5.0, 50.0):
        assert checkpoint in grid
    with pytest.raises(DomainError):
        time_grid([1.0], growth=1.0)


def test_tail_estimate_small_run():
    result = tail_exponent_estimate(1.0, 4000, CHECKPOINTS, SEED, growth=1.05)
    assert result.times == CHECKPOINTS
    assert all(a >= b for a, b in zip(result.survival, result.survival[1:]))
    assert sum(result.within_3se) >= len(CHECKPOINTS) - 1
    assert result.slope == pytest.approx(-0.5, abs=0.15)
    assert result.slope_stderr > 0
    assert result.fit_window[1] == 100.0
    assert np.all(np.diff(result.truncated_sqrt_mean) > 0)
    assert result.truncated_sqrt_mean[-1] == pytest.approx(result.truncated_sqrt_oracle[-1], rel=0.1)


def test_tail_estimate_is_reproducible():
    first = tail_exponent_estimate(1.0, 300, CHECKPOINTS, SEED, growth=1.1)
    second = tail_exponent_estimate(1.0, 300, CHECKPOINTS, SEED, growth=1.1, threads=2)
    assert first == second


def test_low_survivor_count_is_flagged():
    result = tail_exponent_estimate(1.0, 200, CHECKPOINTS, SEED, growth=1.1)
    assert result.low_survivors


@pytest.mark.parametrize(
    "h, checkpoints",
    [
        (0.0, CHECKPOINTS),
        (1.0, [10.0, 5.0, 20.0]),
        (1.0, [-1.0, 1.0]),
        (1.0, [1.0, 2.0, 3.0]),
    ],
)
def test_tail_estimate_domain_errors(h, checkpoints):
    with pytest.raises(DomainError):
        tail_exponent_estimate(h, 100, checkpoints, SEED)


@pytest.mark.slow
def test_tail_exponent_at_scale():
    checkpoints = np.geomspace(1.0, 1e4, 21).tolist()
    result = tail_exponent_estimate(1.0, 100_000, checkpoints, SEED, growth=1.05, threads=None)
    assert not result.low_survivors
    assert result.slope == pytest.approx(-0.5, abs=0.05)
    assert sum(result.within_3se) >= len(checkpoints) - 1
    decades = result.truncated_sqrt_mean[::5]
    assert np.all(np.diff(decades) > 0)
    for empirical, oracle in zip(result.truncated_sqrt_mean, result.truncated_sqrt_oracle):
        assert empirical == pytest.approx(oracle, rel=0.05)


@pytest.mark.slow
def test_survivors_run_out_before_a_million():
    # About sqrt(2/pi) * 1e-3 of the paths outlive t = 1e6, so 1e5 trials leave ~80
    checkpoints = np.geomspace(1.0, 1e6, 31).tolist()
    result = tail_exponent_estimate(1.0, 100_000, checkpoints, SEED, growth=1.05, threads=None)
    assert result.low_survivors
    assert result.fit_window[1] == pytest.approx(1e6)
    assert abs(result.slope + 0.5) <= 3.0 * result.slope_stderr
