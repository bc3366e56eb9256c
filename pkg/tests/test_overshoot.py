import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bounds.overshoot import gaussian_abs_moment, overshoot_mean_bound, overshoot_moment_bound, wald_bracket
from core.errors import DomainError


def test_moment_bound_closed_form():
    assert overshoot_moment_bound(1.0, 1.0, 2) == pytest.approx(40.0 / 3.0, rel=1e-14)
    assert overshoot_moment_bound(1.0, 0.0, 2) == pytest.approx(8.0 / 3.0, rel=1e-14)


@settings(max_examples=30)
@given(st.floats(min_value=0.05, max_value=5.0), st.floats(min_value=0.05, max_value=5.0))
def test_quadrature_agrees_with_the_closed_form(step_mean, step_std):
    closed = overshoot_moment_bound(step_mean, step_std, 2, method="closed")
    assert overshoot_moment_bound(step_mean, step_std, 2, method="quadrature") == pytest.approx(closed, rel=1e-9)


def test_gaussian_abs_moment_known_values():
    # E|Z| = sqrt(2/pi) and E Z^4 = 3 for a standard normal
    assert gaussian_abs_moment(0.0, 1.0, 1.0) == pytest.approx(0.7978845608028654, rel=1e-10)
    assert gaussian_abs_moment(0.0, 1.0, 4.0) == pytest.approx(3.0, rel=1e-10)
    assert gaussian_abs_moment(2.0, 0.0, 3.0) == 8.0


def test_moment_bound_other_orders():
    assert overshoot_moment_bound(1.0, 1.0, 1) > 0
    with pytest.raises(DomainError):
        overshoot_moment_bound(1.0, 1.0, 1, method="closed")
    with pytest.raises(DomainError):
        overshoot_moment_bound(1.0, 1.0, 0)
    with pytest.raises(DomainError):
        overshoot_moment_bound(1.0, 1.0, 2, method="simpson")


def test_degenerate_steps_are_rejected():
    with pytest.raises(DomainError):
        overshoot_moment_bound(0.0, 0.0, 2)
    with pytest.raises(DomainError):
        overshoot_mean_bound(-1.0, 1.0)


def test_mean_bound():
    assert overshoot_mean_bound(1.0, 1.0) == 6.0
    assert overshoot_mean_bound(2.0, 0.0) == 4.0


def test_wald_bracket():
    assert wald_bracket(1.0, 1.0, 100.0) == (100.0, 106.0)
    assert wald_bracket(2.0, 0.0, 6.0) == (3.0, 5.0)
    with pytest.raises(DomainError):
        wald_bracket(0.0, 1.0, 10.0)
    with pytest.raises(DomainError):
        wald_bracket(1.0, 1.0, -1.0)


@pytest.mark.parametrize("step_mean", [0.1, 0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("step_std", [0.0, 0.1, 0.5, 1.0, 3.0])
def test_mean_bound_dominates_the_root_second_moment_bound(step_mean, step_std):
    assert overshoot_mean_bound(step_mean, step_std) >= overshoot_moment_bound(step_mean, step_std, 2) ** 0.5
