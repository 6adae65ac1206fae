import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pushrecovery.capture_point import (
    CapturePointState,
    analytic_cp_trajectory,
    capture_point,
    capture_region,
    com_rate_from_cp,
    cp_rate,
    cp_rate_cmp,
    is_ankle_recoverable,
)
from pushrecovery.model import CentroidalState, GroundPoint, RobotParams, cmp_from_cop
from pushrecovery.support import SupportPolygon

ROBOT = RobotParams()
OMEGA = math.sqrt(9.81 / 0.35)
FOOT = SupportPolygon((-0.075, -0.04), (0.075, 0.04))

coord = st.floats(-0.5, 0.5, allow_nan=False)
speed = st.floats(-2.0, 2.0, allow_nan=False)


def rk4_cp(xi0, p, t_end, dt):
    """Independent RK4 for xi' = omega (xi - p)."""
    xi = float(xi0)
    f = lambda v: OMEGA * (v - p)  # noqa: E731
    for _ in range(int(round(t_end / dt))):
        k1 = f(xi)
        k2 = f(xi + 0.5 * dt * k1)
        k3 = f(xi + 0.5 * dt * k2)
        k4 = f(xi + dt * k3)
        xi += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return xi


class TestCapturePoint:
    def test_at_rest(self):
        s = CentroidalState((0.03, -0.02))
        np.testing.assert_array_equal(capture_point(s, ROBOT).xi_m, s.com_pos_m)

    def test_moving(self):
        xi = capture_point(CentroidalState((0, 0), (0.5, 0)), ROBOT).xi_m
        assert xi[0] == pytest.approx(0.5 / OMEGA)
        assert xi[0] == pytest.approx(0.0944462, rel=1e-4)

    @given(coord, coord, speed, speed, coord, coord, speed, speed)
    def test_linear(self, x1, y1, vx1, vy1, x2, y2, vx2, vy2):
        a = CentroidalState((x1, y1), (vx1, vy1))
        b = CentroidalState((x2, y2), (vx2, vy2))
        ab = CentroidalState(a.com_pos_m + b.com_pos_m, a.com_vel_mps + b.com_vel_mps)
        np.testing.assert_allclose(capture_point(ab, ROBOT).xi_m,
                                   capture_point(a, ROBOT).xi_m + capture_point(b, ROBOT).xi_m,
                                   rtol=1e-12, atol=1e-15)


class TestComRate:
    def test_on_cp(self):
        np.testing.assert_array_equal(
            com_rate_from_cp((0.1, 0.1), CapturePointState((0.1, 0.1)), ROBOT), [0, 0])

    def test_inverse_example(self):
        v = com_rate_from_cp((0, 0), CapturePointState((0.0944462, 0)), ROBOT)
        assert v[0] == pytest.approx(0.5, rel=1e-4)

    @given(coord, coord, speed, speed)
    def test_round_trip(self, x, y, vx, vy):
        s = CentroidalState((x, y), (vx, vy))
        v = com_rate_from_cp(s.com_pos_m, capture_point(s, ROBOT), ROBOT)
        # Exact up to the rounding of x + v/omega: a few ulps of the CP magnitude.
        scale = np.abs(s.com_pos_m) + np.abs(s.com_vel_mps) / OMEGA
        assert np.all(np.abs(v - s.com_vel_mps) <= 4 * np.spacing(scale) * OMEGA + 1e-300)


class TestCpRate:
    def test_parked(self):
        np.testing.assert_array_equal(
            cp_rate(CapturePointState((0.02, 0.01)), GroundPoint((0.02, 0.01)), ROBOT), [0, 0])

    def test_runaway(self):
        r = cp_rate(CapturePointState((0.1, 0)), GroundPoint((0, 0)), ROBOT)
        assert r[0] == pytest.approx(0.529404, rel=1e-4)

    def test_cmp_variant_shares_law(self):
        assert cp_rate_cmp is cp_rate

    @given(coord, coord, coord, coord)
    def test_substitution_without_momentum(self, xi_x, xi_y, px, py):
        xi, cop = CapturePointState((xi_x, xi_y)), GroundPoint((px, py))
        np.testing.assert_array_equal(cp_rate_cmp(xi, cmp_from_cop(cop, (0, 0), ROBOT), ROBOT),
                                      cp_rate(xi, cop, ROBOT))

    @given(coord, coord)
    def test_cop_pushes_cp_away(self, xi_x, px):
        r = cp_rate(CapturePointState((xi_x, 0)), GroundPoint((px, 0)), ROBOT)[0]
        assert np.sign(r) == np.sign(xi_x - px)


class TestAnalyticTrajectory:
    def test_equilibrium(self):
        p = GroundPoint((0.03, -0.01))
        for t in (0.0, 0.5, 3.0):
            np.testing.assert_array_equal(
                analytic_cp_trajectory(CapturePointState(p.xy_m), p, t, ROBOT).xi_m, p.xy_m)

    def test_growth(self):
        xi = analytic_cp_trajectory(CapturePointState((0.01, 0)), GroundPoint((0, 0)), 0.2, ROBOT)
        assert xi.xi_m[0] == pytest.approx(0.01 * math.exp(OMEGA * 0.2))
        assert xi.xi_m[0] == pytest.approx(0.0288305, rel=1e-4)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            analytic_cp_trajectory(CapturePointState((0, 0)), GroundPoint((0, 0)), -0.1, ROBOT)

    def test_matches_rk4(self):
        xi = analytic_cp_trajectory(CapturePointState((0.02, 0)), GroundPoint((0.005, 0)), 1.0,
                                    ROBOT).xi_m[0]
        assert rk4_cp(0.02, 0.005, 1.0, 1e-3) == pytest.approx(xi, rel=1e-6)

    @given(st.floats(-0.1, 0.1).filter(lambda d: abs(d) > 1e-6),
           st.floats(0.0, 2.0), st.floats(1e-3, 1.0))
    def test_strictly_diverges(self, offset, t, dt):
        p = GroundPoint((0.0, 0.0))
        xi0 = CapturePointState((offset, 0.0))
        a = abs(analytic_cp_trajectory(xi0, p, t, ROBOT).xi_m[0])
        b = abs(analytic_cp_trajectory(xi0, p, t + dt, ROBOT).xi_m[0])
        assert b > a


class TestRecoverable:
    def test_center(self):
        assert is_ankle_recoverable(CapturePointState((0, 0)), FOOT)

    def test_beyond_toe(self):
        assert not is_ankle_recoverable(CapturePointState((0.0944462, 0)), FOOT)

    def test_edge_counts(self):
        assert is_ankle_recoverable(CapturePointState((0.075, 0.04)), FOOT)


class TestCaptureRegion:
    def test_disc_reaches_polygon(self):
        assert capture_region(CapturePointState((0.1, 0)), 0.05).intersects(FOOT)
        assert not capture_region(CapturePointState((0.2, 0)), 0.05).intersects(FOOT)

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            capture_region(CapturePointState((0, 0)), -1.0)
