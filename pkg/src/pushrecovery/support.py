"""Foot contact geometry and the unilateral CoP constraint."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import GroundPoint, PointRole, RobotParams, _vec2

# Default small-humanoid dimensions.
FOOT_LENGTH_M = 0.15
FOOT_WIDTH_M = 0.08


@dataclass(frozen=True)
class FootGeometry:
    length_m: float = FOOT_LENGTH_M
    width_m: float = FOOT_WIDTH_M
    # Ankle position relative to the foot center.
    ankle_offset_m: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self) -> None:
        if not (self.length_m > 0 and math.isfinite(self.length_m)):
            raise ValueError(f"FootGeometry.length_m must be > 0, got {self.length_m!r}")
        if not (self.width_m > 0 and math.isfinite(self.width_m)):
            raise ValueError(f"FootGeometry.width_m must be > 0, got {self.width_m!r}")
        offset = _vec2(self.ankle_offset_m)
        half = np.array([self.length_m, self.width_m]) / 2
        if not np.all(np.abs(offset) < half):
            raise ValueError(
                f"FootGeometry.ankle_offset_m {offset} must lie strictly inside the foot"
            )
        object.__setattr__(self, "ankle_offset_m", offset)


@dataclass(frozen=True)
class SupportPolygon:
    """Axis-aligned rectangle in the ground frame."""

    min_xy_m: np.ndarray
    max_xy_m: np.ndarray

    def __post_init__(self) -> None:
        lo, hi = _vec2(self.min_xy_m), _vec2(self.max_xy_m)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            raise ValueError(f"SupportPolygon needs min < max componentwise, got {lo}, {hi}")
        object.__setattr__(self, "min_xy_m", lo)
        object.__setattr__(self, "max_xy_m", hi)

    @property
    def center(self) -> np.ndarray:
        return (self.min_xy_m + self.max_xy_m) / 2

    @property
    def half_extent(self) -> np.ndarray:
        return (self.max_xy_m - self.min_xy_m) / 2


def polygon_from_stance(foot: FootGeometry, stance_center=(0.0, 0.0)) -> SupportPolygon:
    """Single-foot polygon with the ankle placed at ``stance_center``."""
    foot_center = np.asarray(stance_center, dtype=float) - foot.ankle_offset_m
    half = np.array([foot.length_m, foot.width_m]) / 2
    return SupportPolygon(foot_center - half, foot_center + half)


def double_support_polygon(
    foot: FootGeometry, stance_center=(0.0, 0.0), stance_width_m: float = 0.1
) -> SupportPolygon:
    """Bounding rectangle of two parallel feet whose ankles sit
    ``stance_width_m`` apart laterally around ``stance_center``."""
    if stance_width_m < 0:
        raise ValueError("stance_width_m must be >= 0")
    center = np.asarray(stance_center, dtype=float)
    shift = np.array([0.0, stance_width_m / 2])
    left = polygon_from_stance(foot, center + shift)
    right = polygon_from_stance(foot, center - shift)
    return SupportPolygon(
        np.minimum(left.min_xy_m, right.min_xy_m), np.maximum(left.max_xy_m, right.max_xy_m)
    )


def contains(polygon: SupportPolygon, point) -> bool:
    """Closed-set membership: edges count as inside."""
    p = np.asarray(getattr(point, "xy_m", point), dtype=float)
    return bool(np.all(p >= polygon.min_xy_m) and np.all(p <= polygon.max_xy_m))


def clamp_cop(p: GroundPoint, polygon: SupportPolygon) -> GroundPoint:
    xy = np.clip(p.xy_m, polygon.min_xy_m, polygon.max_xy_m)
    return GroundPoint(xy, PointRole.COP)


def max_ankle_torque(
    polygon: SupportPolygon, params: RobotParams, ankle_xy=(0.0, 0.0)
) -> tuple[np.ndarray, np.ndarray]:
    """Ankle torque bounds ``(lower, upper)`` indexed ``(tau_x, tau_y)``.

    At either bound the CoP sits exactly on the matching polygon edge.
    """
    mg = params.vertical_force_N
    ankle = np.asarray(ankle_xy, dtype=float)
    lo = mg * (polygon.min_xy_m - ankle)
    hi = mg * (polygon.max_xy_m - ankle)
    # tau_x moves the CoP along y, tau_y along x.
    return lo[::-1].copy(), hi[::-1].copy()
