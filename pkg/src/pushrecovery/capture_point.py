"""Capture-point algebra on top of the LIPM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CentroidalState, GroundPoint, RobotParams, natural_frequency, _vec2
from .support import SupportPolygon, contains


@dataclass(frozen=True)
class CapturePointState:
    xi_m: np.ndarray

    def __post_init__(self) -> None:
        arr = _vec2(self.xi_m)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"capture point must be finite, got {arr}")
        object.__setattr__(self, "xi_m", arr)


def capture_point(state: CentroidalState, params: RobotParams) -> CapturePointState:
    omega = natural_frequency(params)
    return CapturePointState(state.com_pos_m + state.com_vel_mps / omega)


def com_rate_from_cp(com, xi: CapturePointState, params: RobotParams) -> np.ndarray:
    """CoM velocity implied by the capture point: the CoM chases the CP."""
    omega = natural_frequency(params)
    return omega * (xi.xi_m - np.asarray(com, dtype=float))


def cp_rate(xi: CapturePointState, cop: GroundPoint, params: RobotParams) -> np.ndarray:
    """The CP runs away from the pivot point at rate ``omega``."""
    omega = natural_frequency(params)
    return omega * (xi.xi_m - cop.xy_m)


# With the CMP as pivot the same first-order law holds.
cp_rate_cmp = cp_rate


def analytic_cp_trajectory(
    xi0: CapturePointState, cop_const: GroundPoint, t: float, params: RobotParams
) -> CapturePointState:
    """Closed-form CP at time ``t`` for a CoP held constant since ``t = 0``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    growth = math.exp(natural_frequency(params) * t)
    return CapturePointState(cop_const.xy_m + (xi0.xi_m - cop_const.xy_m) * growth)


def is_ankle_recoverable(xi: CapturePointState, polygon: SupportPolygon) -> bool:
    """True iff the CP lies in the closed support polygon.

    Points on the edge count as recoverable so that envelope bisection has a
    well-defined fixed point.
    """
    return contains(polygon, xi.xi_m)


@dataclass(frozen=True)
class CaptureRegion:
    """One-step capture region, approximated as a disc around the CP.

    The radius is a placeholder; stepping is not simulated.
    """

    center_m: np.ndarray
    radius_m: float = 0.05

    def intersects(self, polygon: SupportPolygon) -> bool:
        nearest = np.clip(self.center_m, polygon.min_xy_m, polygon.max_xy_m)
        return float(np.hypot(*(nearest - self.center_m))) <= self.radius_m


def capture_region(xi: CapturePointState, radius_m: float = 0.05) -> CaptureRegion:
    if radius_m < 0:
        raise ValueError("capture region radius must be >= 0")
    return CaptureRegion(xi.xi_m, radius_m)
