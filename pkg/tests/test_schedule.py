import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhdkit.schedule import ConstantSchedule, PiecewiseLinear, SmoothLog, schedule_from_dict


@given(st.floats(0.01, 10), st.floats(0, 50))
def test_smooth_log_product_is_one(gamma, t):
    a, b = SmoothLog(gamma, 50).coefficients(t)
    assert a > 0 and b > 0
    assert a * b == pytest.approx(1.0, rel=1e-14)


def test_smooth_log_is_strictly_monotone():
    s = SmoothLog()
    ts = np.linspace(0, s.T, 200)
    kin, pot = np.array([s.coefficients(t) for t in ts]).T
    assert np.all(np.diff(kin) < 0) and np.all(np.diff(pot) > 0)
    ratio = kin / pot
    assert np.all(np.diff(ratio) < 0) and ratio[-1] < 1e-4


@pytest.mark.parametrize("gamma, T", [(0, 1), (-1, 1), (1, 0)])
def test_smooth_log_validation(gamma, T):
    with pytest.raises(ValueError):
        SmoothLog(gamma, T)


def test_piecewise_linear_interpolates_values():
    s = PiecewiseLinear(((0, 1.0, 0.5), (2, 0.2, 2.5), (4, 0.1, 3.0)))
    assert s.T == 4
    assert s.coefficients(1.0) == pytest.approx((0.6, 1.5))
    assert s.coefficients(-1.0) == (1.0, 0.5) and s.coefficients(9.0) == (0.1, 3.0)


@pytest.mark.parametrize("points", [
    ((0, 1, 1),),
    ((1, 1, 1), (2, 1, 1)),
    ((0, 1, 1), (2, 1, 1), (1, 1, 1)),
    ((0, 1, 1), (1, 0, 1)),
])
def test_piecewise_linear_validation(points):
    with pytest.raises(ValueError):
        PiecewiseLinear(points)


def test_sampled_matches_at_breakpoints():
    s = SmoothLog(2.0, 5.0)
    pl = PiecewiseLinear.sampled(s, 6)
    for t, a, b in pl.points:
        assert pl.coefficients(t) == pytest.approx(s.coefficients(t))


@pytest.mark.parametrize("s", [SmoothLog(0.5, 3), ConstantSchedule(0.0, 1.0, 2.0),
                               PiecewiseLinear(((0, 1, 1), (1, 2, 3)))])
def test_dict_round_trip(s):
    assert schedule_from_dict(s.to_dict()) == s
