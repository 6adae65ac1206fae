import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pushrecovery.capture_point import CapturePointState, cp_rate
from pushrecovery.controllers import (
    ControllerConfig,
    CpError,
    PdGains,
    ServoParams,
    ankle_torque_pd,
    cp_error,
    default_torque_gains,
    flywheel_guard,
    hdot_from_hip_torque,
    hip_torque_pd,
    position_command_pd,
    servo_torque,
)
from pushrecovery.model import GroundPoint, RobotParams, cmp_from_cop, cop_from_ankle_torque
from pushrecovery.support import FootGeometry, polygon_from_stance

ROBOT = RobotParams()
MG = 3.6 * 9.81
FOOT = polygon_from_stance(FootGeometry())
TOE_TORQUE = MG * 0.075

small = st.floats(-0.2, 0.2, allow_nan=False)


def err(ex=0.0, ey=0.0, rx=0.0, ry=0.0):
    return CpError((ex, ey), (rx, ry))


class TestCpError:
    def test_zero(self):
        e = cp_error(CapturePointState((0.01, 0.02)), CapturePointState((0.01, 0.02)))
        np.testing.assert_array_equal(e.error_m, [0, 0])

    def test_sign(self):
        e = cp_error(CapturePointState((0, 0)), CapturePointState((0.05, 0)))
        assert e.error_m[0] == -0.05

    def test_negation(self):
        e = -err(0.01, -0.02, 0.3, 0.4)
        np.testing.assert_array_equal(e.error_m, [-0.01, 0.02])
        np.testing.assert_array_equal(e.error_rate_mps, [-0.3, -0.4])

    @given(small, small, small, small)
    def test_error_dynamics_closure(self, xi_x, xi_y, px, py):
        # With a constant reference the error rate is minus the CP law.
        xi = CapturePointState((xi_x, xi_y))
        cop = GroundPoint((px, py))
        rate = cp_rate(xi, cop, ROBOT)
        e = cp_error(CapturePointState((0, 0)), xi, (0, 0), rate)
        np.testing.assert_array_equal(e.error_rate_mps, -ROBOT.omega * (xi.xi_m - cop.xy_m))


class TestAnkleTorque:
    def test_zero(self):
        np.testing.assert_array_equal(ankle_torque_pd(err(), PdGains(50), FOOT, ROBOT), [0, 0])

    def test_unclamped(self):
        tau = ankle_torque_pd(err(0.02), PdGains(50), FOOT, ROBOT)
        assert tau[1] == pytest.approx(1.0)
        assert tau[0] == 0.0

    def test_saturates_at_toe(self):
        tau, raw = ankle_torque_pd(err(0.2), PdGains(50), FOOT, ROBOT, return_raw=True)
        assert raw[1] == pytest.approx(10.0)
        assert tau[1] == pytest.approx(TOE_TORQUE)
        assert tau[1] == pytest.approx(2.64870, abs=5e-6)

    def test_lateral_error_drives_roll_torque(self):
        tau = ankle_torque_pd(err(0.0, 0.01), PdGains(50), FOOT, ROBOT)
        assert tau[0] == pytest.approx(0.5) and tau[1] == 0.0

    def test_derivative_term(self):
        tau = ankle_torque_pd(err(0.0, 0.0, 0.1), PdGains(0.0, 2.0), FOOT, ROBOT)
        assert tau[1] == pytest.approx(0.2)

    @given(small, small, small, small)
    def test_cop_stays_on_foot(self, ex, ey, rx, ry):
        tau = ankle_torque_pd(err(ex, ey, rx, ry), PdGains(200, 10), FOOT, ROBOT)
        p = cop_from_ankle_torque(tau, ROBOT).xy_m
        assert np.all(np.abs(p) <= [0.075 + 1e-15, 0.04 + 1e-15])

    @given(small, st.floats(1.0, 5.0))
    def test_raw_torque_grows_with_error(self, ex, k):
        _, a = ankle_torque_pd(err(ex), PdGains(50, 1), FOOT, ROBOT, return_raw=True)
        _, b = ankle_torque_pd(err(k * ex), PdGains(50, 1), FOOT, ROBOT, return_raw=True)
        assert abs(b[1]) >= abs(a[1])


class TestHipTorque:
    def test_zero(self):
        np.testing.assert_array_equal(hip_torque_pd(err(), PdGains(50), ROBOT), [0, 0])

    def test_shifts_cmp(self):
        tau = hip_torque_pd(err(0.02), PdGains(50), ROBOT)
        assert tau[1] == pytest.approx(1.0)
        hdot = hdot_from_hip_torque(tau)
        assert hdot[1] == pytest.approx(1.0)
        cmp = cmp_from_cop(GroundPoint((0, 0)), hdot, ROBOT)
        assert cmp.xy_m[0] == pytest.approx(1.0 / MG)
        assert cmp.xy_m[0] == pytest.approx(0.0283158, abs=5e-8)

    def test_frontal_cmp_moves_with_error(self):
        # The frontal axis carries the sign flip: CMP_y still moves toward +e_y.
        hdot = hdot_from_hip_torque(hip_torque_pd(err(0.0, 0.01), PdGains(50), ROBOT))
        assert hdot[0] < 0
        assert cmp_from_cop(GroundPoint((0, 0)), hdot, ROBOT).xy_m[1] > 0

    def test_torque_limit(self):
        tau, sat, lim = hip_torque_pd(err(0.2), PdGains(50), ROBOT, return_flags=True)
        assert tau[1] == pytest.approx(ROBOT.flywheel_torque_limit_Nm)
        assert sat and not lim

    def test_angle_limit_blocks_outward_torque(self):
        angle = ROBOT.flywheel_angle_limit_rad
        tau, _, lim = hip_torque_pd(err(0.02), PdGains(50), ROBOT, (0.0, angle), (0.0, 0.0),
                                    return_flags=True)
        assert tau[1] == 0.0 and lim

    def test_angle_limit_allows_return(self):
        angle = ROBOT.flywheel_angle_limit_rad
        tau = hip_torque_pd(err(-0.02), PdGains(50), ROBOT, (0.0, angle), (0.0, 0.0))
        assert tau[1] == pytest.approx(-1.0)


class TestFlywheelGuard:
    def test_brakes_before_limit(self):
        # Spinning outward so fast it cannot stop in time: full reverse torque.
        hdot, _, lim = flywheel_guard((0.0, 1.0), (0.0, 0.5), (0.0, 5.0), ROBOT)
        assert hdot[1] == -ROBOT.flywheel_torque_limit_Nm and lim

    def test_free_inside_range(self):
        hdot, sat, lim = flywheel_guard((0.3, -0.2), (0.0, 0.0), (0.0, 0.0), ROBOT)
        np.testing.assert_array_equal(hdot, [0.3, -0.2])
        assert not sat and not lim

    def test_zero_range_disables(self):
        robot = RobotParams(flywheel_angle_limit_rad=0.0)
        hdot, _, _ = flywheel_guard((0.3, -0.2), (0.0, 0.0), (0.0, 0.0), robot)
        np.testing.assert_array_equal(hdot, [0.0, 0.0])

    @given(st.floats(-5, 5), st.floats(-0.6, 0.6), st.floats(-10, 10))
    def test_within_torque_limit(self, h, angle, rate):
        hdot, _, _ = flywheel_guard((h, h), (angle, angle), (rate, rate), ROBOT)
        assert np.all(np.abs(hdot) <= ROBOT.flywheel_torque_limit_Nm)


class TestPositionCommand:
    def test_zero(self):
        cmd = position_command_pd(err(), {j: PdGains(4.0) for j in
                                          ("ankle", "hip", "arm", "elbow")}, ControllerConfig())
        for j in ("ankle", "hip", "arm", "elbow"):
            np.testing.assert_array_equal(cmd.joint(j), [0, 0])

    def test_ankle_offset(self):
        gains = {j: PdGains(4.0) for j in ("ankle", "hip", "arm", "elbow")}
        cmd = position_command_pd(err(0.05), gains, ControllerConfig())
        assert cmd.ankle_rad[1] == pytest.approx(0.2)
        assert cmd.ankle_rad[0] == 0.0

    @given(small, small, small, small)
    def test_all_off_is_zero(self, ex, ey, rx, ry):
        config = ControllerConfig(ankle=False, hip=False, arm=False)
        cmd = position_command_pd(err(ex, ey, rx, ry), config.position_gains, config)
        for j in ("ankle", "hip", "arm", "elbow"):
            np.testing.assert_array_equal(cmd.joint(j), [0, 0])

    def test_arm_flag_gates_arm_and_elbow(self):
        config = ControllerConfig(arm=False)
        cmd = position_command_pd(err(0.05), config.position_gains, config)
        assert cmd.hip_rad[1] != 0.0
        np.testing.assert_array_equal(cmd.arm_rad, [0, 0])
        np.testing.assert_array_equal(cmd.elbow_rad, [0, 0])

    def test_clipped_to_joint_range(self):
        config = ControllerConfig()
        cmd = position_command_pd(err(10.0), config.position_gains, config)
        assert cmd.ankle_rad[1] == pytest.approx(0.5)
        assert cmd.hip_rad[1] == pytest.approx(ROBOT.flywheel_angle_limit_rad)


class TestServo:
    SERVO = ServoParams(20.0, 0.0, TOE_TORQUE)

    def test_at_target(self):
        assert servo_torque(0.3, 0.3, 0.0, self.SERVO) == 0.0

    def test_proportional(self):
        assert servo_torque(0.1, 0.0, 0.0, self.SERVO) == pytest.approx(2.0)

    def test_saturates(self):
        assert servo_torque(1.0, 0.0, 0.0, self.SERVO) == pytest.approx(2.6487, abs=5e-5)

    def test_damping(self):
        assert servo_torque(0.0, 0.0, 1.0, ServoParams(20.0, 0.5, 10.0)) == pytest.approx(-0.5)

    def test_invalid(self):
        with pytest.raises(ValueError):
            ServoParams(-1.0, 0.0, 1.0)


class TestConfig:
    def test_default_torque_gains(self):
        g = default_torque_gains(ROBOT)
        assert g.kp / MG == pytest.approx(2.0)
        assert g.kd == pytest.approx(0.1 * MG / math.sqrt(9.81 / 0.35))

    def test_closed_loop_eigenvalue_negative(self):
        g = default_torque_gains(ROBOT)
        w = ROBOT.omega
        assert w * (1 - g.kp / MG) / (1 + w * g.kd / MG) < 0

    @pytest.mark.parametrize("kwargs", [{"mode": "velocity"}, {"rate_mode": "guess"},
                                        {"weights": {"hip": -1, "arm": 0, "elbow": 0}}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ControllerConfig(**kwargs)

    def test_negative_gains(self):
        with pytest.raises(ValueError):
            PdGains(-1.0)
