"""Capture-point feedback controllers and the position-servo model.

Two controller families are provided:

* torque space: PD laws that produce ankle torque (CoP regulation) and
  hip torque (CMP regulation) directly;
* position space: the same PD law produces joint *angle* offsets, which a
  stiff position servo turns into torque.

Torques and joint angles are indexed by rotation axis ``(x, y)``; the
sagittal error ``e_x`` drives the ``y`` components and vice versa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capture_point import CapturePointState
from .model import RobotParams, _vec2, natural_frequency
from .support import SupportPolygon, max_ankle_torque

JOINTS = ("ankle", "hip", "arm", "elbow")
UPPER_BODY_JOINTS = ("hip", "arm", "elbow")

# Hdot = HIP_SIGN * tau_hip. With the CMP relation this moves the CMP by
# +tau_hip/(m g) on both axes, i.e. in the same direction as the ankle torque
# moves the CoP.
HIP_SIGN = np.array([-1.0, 1.0])
HIP_SIGN.setflags(write=False)


@dataclass(frozen=True)
class PdGains:
    kp: float
    kd: float = 0.0

    def __post_init__(self) -> None:
        if not (self.kp >= 0 and self.kd >= 0 and math.isfinite(self.kp) and math.isfinite(self.kd)):
            raise ValueError(f"PD gains must be finite and >= 0, got kp={self.kp}, kd={self.kd}")


@dataclass(frozen=True)
class CpError:
    error_m: np.ndarray
    error_rate_mps: np.ndarray

    def __post_init__(self) -> None:
        for name in ("error_m", "error_rate_mps"):
            arr = _vec2(getattr(self, name))
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"CpError.{name} must be finite, got {arr}")
            object.__setattr__(self, name, arr)

    def __neg__(self) -> "CpError":
        return CpError(-self.error_m, -self.error_rate_mps)


@dataclass(frozen=True)
class TorqueCommand:
    ankle_Nm: np.ndarray
    hip_Nm: np.ndarray


@dataclass(frozen=True)
class PositionCommand:
    """Joint angle offsets added to the nominal posture."""

    ankle_rad: np.ndarray = field(default_factory=lambda: np.zeros(2))
    hip_rad: np.ndarray = field(default_factory=lambda: np.zeros(2))
    arm_rad: np.ndarray = field(default_factory=lambda: np.zeros(2))
    elbow_rad: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self) -> None:
        for joint in JOINTS:
            arr = _vec2(getattr(self, f"{joint}_rad"))
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"PositionCommand.{joint}_rad must be finite")
            object.__setattr__(self, f"{joint}_rad", arr)

    def joint(self, name: str) -> np.ndarray:
        return getattr(self, f"{name}_rad")


@dataclass(frozen=True)
class ServoParams:
    """Position-controlled actuator seen as a saturated spring-damper."""

    stiffness_Nm_per_rad: float
    damping_Nm_s_per_rad: float
    torque_limit_Nm: float

    def __post_init__(self) -> None:
        for name in ("stiffness_Nm_per_rad", "damping_Nm_s_per_rad", "torque_limit_Nm"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"ServoParams.{name} must be finite and >= 0, got {value!r}")


def default_position_gains() -> dict[str, PdGains]:
    return {joint: PdGains(6.0, 0.15) for joint in JOINTS}


def default_servos() -> dict[str, ServoParams]:
    # Ankle: stiff enough (K > m g z_c, D > m g z_c / omega for the default robot) that
    # the passive servo alone pins the CoP to the toe after an impulse.
    upper = ServoParams(5.0, 1.0, 2.0)
    return {"ankle": ServoParams(25.0, 3.0, 3.0), "hip": upper, "arm": upper, "elbow": upper}


def default_weights() -> dict[str, float]:
    return {"hip": 1.0, "arm": 0.3, "elbow": 0.1}


def default_joint_limits() -> dict[str, float | None]:
    # None: fall back to the flywheel angle limit.
    return {"ankle": 0.5, "hip": None, "arm": None, "elbow": None}


@dataclass(frozen=True)
class ControllerConfig:
    mode: str = "position"  # "position" or "torque"
    ankle: bool = True
    hip: bool = True
    arm: bool = True
    # Torque-space gains; None derives kp = 2 m g, kd = 0.1 m g / omega.
    ankle_torque_gains: PdGains | None = None
    hip_torque_gains: PdGains | None = None
    position_gains: dict = field(default_factory=default_position_gains)
    servos: dict = field(default_factory=default_servos)
    weights: dict = field(default_factory=default_weights)
    joint_limits: dict = field(default_factory=default_joint_limits)
    rate_mode: str = "analytic"  # or "finite_difference"

    def __post_init__(self) -> None:
        if self.mode not in ("position", "torque"):
            raise ValueError(f"controller mode must be 'position' or 'torque', got {self.mode!r}")
        if self.rate_mode not in ("analytic", "finite_difference"):
            raise ValueError(f"rate_mode must be 'analytic' or 'finite_difference', got {self.rate_mode!r}")
        for name, table in (("position_gains", self.position_gains), ("servos", self.servos)):
            missing = set(JOINTS) - set(table)
            if missing:
                raise ValueError(f"{name} missing joints {sorted(missing)}")
        for joint in UPPER_BODY_JOINTS:
            w = self.weights.get(joint)
            if w is None or not (w >= 0 and math.isfinite(w)):
                raise ValueError(f"weight for {joint} must be finite and >= 0, got {w!r}")
        for joint in JOINTS:
            lim = self.joint_limits.get(joint)
            if lim is not None and not (lim >= 0 and math.isfinite(lim)):
                raise ValueError(f"joint limit for {joint} must be >= 0, got {lim!r}")

    @property
    def any_active(self) -> bool:
        return self.ankle or self.hip or self.arm

    def torque_gains(self, params: RobotParams) -> tuple[PdGains, PdGains]:
        default = default_torque_gains(params)
        return (self.ankle_torque_gains or default, self.hip_torque_gains or default)

    def joint_limit(self, joint: str, params: RobotParams) -> float:
        lim = self.joint_limits.get(joint)
        return params.flywheel_angle_limit_rad if lim is None else lim


def default_torque_gains(params: RobotParams) -> PdGains:
    """kp/(m g) = 2 and kd = 0.1 m g / omega: a well damped closed CP loop."""
    mg = params.vertical_force_N
    return PdGains(2.0 * mg, 0.1 * mg / natural_frequency(params))


def cp_error(
    reference: CapturePointState,
    measured: CapturePointState,
    reference_rate=(0.0, 0.0),
    measured_rate=(0.0, 0.0),
) -> CpError:
    """Error ``reference - measured`` and its rate."""
    return CpError(
        reference.xi_m - measured.xi_m,
        np.asarray(reference_rate, dtype=float) - np.asarray(measured_rate, dtype=float),
    )


def _pd_swapped(e: CpError, gains: PdGains) -> np.ndarray:
    # Output indexed by rotation axis: tau_x from e_y, tau_y from e_x.
    raw = gains.kp * e.error_m + gains.kd * e.error_rate_mps
    return raw[::-1].copy()


def ankle_torque_pd(
    e: CpError,
    gains: PdGains,
    polygon: SupportPolygon,
    params: RobotParams,
    ankle_xy=(0.0, 0.0),
    *,
    return_raw: bool = False,
):
    """Ankle torque ``(tau_x, tau_y)`` saturated so the CoP stays on the foot."""
    raw = _pd_swapped(e, gains)
    lo, hi = max_ankle_torque(polygon, params, ankle_xy)
    tau = np.clip(raw, lo, hi)
    return (tau, raw) if return_raw else tau


def flywheel_guard(hdot, angle, rate, params: RobotParams) -> tuple[np.ndarray, bool, bool]:
    """Apply the flywheel torque and angle limits to a requested ``Hdot``.

    Returns ``(hdot, torque_saturated, angle_limited)``. Angles and rates are
    the flywheel's, indexed like ``hdot``. Outward torque is removed at the
    angle limit, and full braking is applied whenever the wheel could no
    longer stop before the limit.
    """
    hdot = np.asarray(hdot, dtype=float)
    angle = np.asarray(angle, dtype=float)
    rate = np.asarray(rate, dtype=float)
    out = np.empty(2)
    torque_sat = angle_lim = False
    for i in range(2):
        h, sat, lim = _guard_axis(float(hdot[i]), float(angle[i]), float(rate[i]),
                                  params.flywheel_inertia_kgm2,
                                  params.flywheel_torque_limit_Nm,
                                  params.flywheel_angle_limit_rad)
        out[i] = h
        torque_sat |= sat
        angle_lim |= lim
    return out, torque_sat, angle_lim


def _guard_axis(hdot: float, angle: float, rate: float, inertia: float,
                torque_limit: float, angle_limit: float) -> tuple[float, bool, bool]:
    out = min(max(hdot, -torque_limit), torque_limit)
    torque_sat = out != hdot
    if torque_limit == 0.0:
        return out, torque_sat, False
    stop = angle + rate * abs(rate) * inertia / (2.0 * torque_limit)
    if abs(stop) >= angle_limit and rate * stop > 0.0:
        return (-torque_limit if rate > 0.0 else torque_limit), torque_sat, True
    if abs(angle) >= angle_limit and out * angle > 0.0:
        return 0.0, torque_sat, True
    if angle_limit == 0.0 and out != 0.0:
        return 0.0, torque_sat, True
    return out, torque_sat, False


def hdot_from_hip_torque(tau_hip) -> np.ndarray:
    return HIP_SIGN * np.asarray(tau_hip, dtype=float)


def hip_torque_pd(
    e: CpError,
    gains: PdGains,
    params: RobotParams,
    flywheel_angle=(0.0, 0.0),
    flywheel_rate=(0.0, 0.0),
    *,
    return_flags: bool = False,
):
    """Hip torque ``(tau_x, tau_y)`` limited by the flywheel torque and range.

    The result maps onto the angular momentum rate through
    :func:`hdot_from_hip_torque`.
    """
    raw = _pd_swapped(e, gains)
    hdot, torque_sat, angle_lim = flywheel_guard(
        hdot_from_hip_torque(raw), flywheel_angle, flywheel_rate, params
    )
    tau = HIP_SIGN * hdot
    return (tau, torque_sat, angle_lim) if return_flags else tau


def position_command_pd(e: CpError, gains: dict, config: ControllerConfig,
                        params: RobotParams | None = None) -> PositionCommand:
    """Joint angle offsets from the CP error, one PD law per joint.

    Strategy flags gate the joints: ``ankle`` the ankle, ``hip`` the hip,
    ``arm`` both arm and elbow. Offsets are clipped to the joint ranges.
    """
    params = params or RobotParams()
    enabled = {"ankle": config.ankle, "hip": config.hip, "arm": config.arm, "elbow": config.arm}
    offsets = {}
    for joint in JOINTS:
        if not enabled[joint]:
            offsets[joint] = np.zeros(2)
            continue
        lim = config.joint_limit(joint, params)
        offsets[joint] = np.clip(_pd_swapped(e, gains[joint]), -lim, lim)
    return PositionCommand(**{f"{j}_rad": v for j, v in offsets.items()})


def servo_torque(commanded_angle, actual_angle, actual_rate, servo: ServoParams):
    """Torque of a proportional position servo with velocity damping."""
    tau = (servo.stiffness_Nm_per_rad * (commanded_angle - actual_angle)
           - servo.damping_Nm_s_per_rad * actual_rate)
    return np.clip(tau, -servo.torque_limit_Nm, servo.torque_limit_Nm)
