"""Linear inverted pendulum (LIPM) and LIPM+flywheel centroidal model.

Index conventions used throughout the package:

* ground points and CoM quantities (positions, velocities, CoP, CMP, capture
  point) are indexed by motion axis ``(x, y)``;
* torques, joint angles, angular momentum rates and flywheel angles are
  indexed by rotation axis ``(x, y)``, so sagittal balance (motion along x)
  is driven by the ``y`` components and frontal balance by the ``x`` ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Default small-humanoid dimensions.
DEFAULT_MASS_KG = 3.6
DEFAULT_COM_HEIGHT_M = 0.35
STANDARD_GRAVITY = 9.81


def _vec2(value) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(2)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RobotParams:
    """Point-mass robot with a lumped upper-body flywheel."""

    mass_kg: float = DEFAULT_MASS_KG
    com_height_m: float = DEFAULT_COM_HEIGHT_M
    gravity_mps2: float = STANDARD_GRAVITY
    # Order-of-magnitude estimate for a 3.6 kg, 53 cm robot.
    flywheel_inertia_kgm2: float = 0.05
    flywheel_angle_limit_rad: float = 0.6
    flywheel_torque_limit_Nm: float = 1.5

    def __post_init__(self) -> None:
        checks = [
            ("mass_kg", self.mass_kg > 0, "> 0"),
            ("com_height_m", self.com_height_m > 0, "> 0"),
            ("gravity_mps2", self.gravity_mps2 > 0, "> 0"),
            ("flywheel_inertia_kgm2", self.flywheel_inertia_kgm2 > 0, "> 0"),
            ("flywheel_angle_limit_rad", self.flywheel_angle_limit_rad >= 0, ">= 0"),
            ("flywheel_torque_limit_Nm", self.flywheel_torque_limit_Nm >= 0, ">= 0"),
        ]
        for name, ok, rule in checks:
            value = getattr(self, name)
            if not (ok and math.isfinite(value)):
                raise ValueError(f"RobotParams.{name} must be finite and {rule}, got {value!r}")

    @property
    def omega(self) -> float:
        return natural_frequency(self)

    @property
    def vertical_force_N(self) -> float:
        """Constant-height LIPM: the vertical GRF balances gravity."""
        return self.mass_kg * self.gravity_mps2


@dataclass(frozen=True)
class CentroidalState:
    com_pos_m: np.ndarray = field(default_factory=lambda: np.zeros(2))
    com_vel_mps: np.ndarray = field(default_factory=lambda: np.zeros(2))
    flywheel_angle_rad: np.ndarray = field(default_factory=lambda: np.zeros(2))
    flywheel_rate_radps: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self) -> None:
        for name in ("com_pos_m", "com_vel_mps", "flywheel_angle_rad", "flywheel_rate_radps"):
            arr = _vec2(getattr(self, name))
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"CentroidalState.{name} must be finite, got {arr}")
            object.__setattr__(self, name, arr)

    def angular_momentum(self, params: RobotParams) -> np.ndarray:
        return params.flywheel_inertia_kgm2 * self.flywheel_rate_radps


class PointRole(str, Enum):
    COP = "CoP"
    CMP = "CMP"
    CAPTURE_POINT = "CapturePoint"
    REFERENCE_CP = "ReferenceCP"


@dataclass(frozen=True)
class GroundPoint:
    xy_m: np.ndarray
    role: PointRole = PointRole.COP

    def __post_init__(self) -> None:
        arr = _vec2(self.xy_m)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"GroundPoint must be finite, got {arr}")
        object.__setattr__(self, "xy_m", arr)
        object.__setattr__(self, "role", PointRole(self.role))


def natural_frequency(params: RobotParams) -> float:
    return math.sqrt(params.gravity_mps2 / params.com_height_m)


def com_accel_lipm(state: CentroidalState, cop: GroundPoint, params: RobotParams) -> np.ndarray:
    w2 = params.gravity_mps2 / params.com_height_m
    return w2 * (state.com_pos_m - cop.xy_m)


def com_accel_flywheel(
    state: CentroidalState, cop: GroundPoint, hdot, params: RobotParams
) -> np.ndarray:
    """CoM acceleration of the LIPM+flywheel.

    ``hdot`` is the rate of centroidal angular momentum ``(Hdot_x, Hdot_y)``.
    A positive pitch rate ``Hdot_y`` decelerates the sagittal motion, a
    positive roll rate ``Hdot_x`` accelerates the frontal one.
    """
    hdot = np.asarray(hdot, dtype=float)
    w2 = params.gravity_mps2 / params.com_height_m
    mz = params.mass_kg * params.com_height_m
    accel = w2 * (state.com_pos_m - cop.xy_m)
    return np.array([accel[0] - hdot[1] / mz, accel[1] + hdot[0] / mz])


def cmp_from_cop(cop: GroundPoint, hdot, params: RobotParams) -> GroundPoint:
    """Centroidal moment pivot. Not clamped: the CMP may leave the foot."""
    hdot = np.asarray(hdot, dtype=float)
    fz = params.vertical_force_N
    xy = np.array([cop.xy_m[0] + hdot[1] / fz, cop.xy_m[1] - hdot[0] / fz])
    return GroundPoint(xy, PointRole.CMP)


def cop_from_ankle_torque(tau_ankle, params: RobotParams) -> GroundPoint:
    """CoP offset from the ankle produced by ankle torque ``(tau_x, tau_y)``."""
    tau = np.asarray(tau_ankle, dtype=float)
    mg = params.vertical_force_N
    return GroundPoint(np.array([tau[1] / mg, tau[0] / mg]), PointRole.COP)
