"""Capture-point push recovery for a LIPM+flywheel humanoid."""

from .capture_point import (
    CapturePointState,
    CaptureRegion,
    analytic_cp_trajectory,
    capture_point,
    capture_region,
    com_rate_from_cp,
    cp_rate,
    cp_rate_cmp,
    is_ankle_recoverable,
)
from .config import ConfigError, load_config, parse_config
from .controllers import (
    ControllerConfig,
    CpError,
    PdGains,
    PositionCommand,
    ServoParams,
    TorqueCommand,
    ankle_torque_pd,
    cp_error,
    flywheel_guard,
    hip_torque_pd,
    position_command_pd,
    servo_torque,
)
from .model import (
    CentroidalState,
    GroundPoint,
    PointRole,
    RobotParams,
    cmp_from_cop,
    com_accel_flywheel,
    com_accel_lipm,
    cop_from_ankle_torque,
    natural_frequency,
)
from .simulation import (
    EnvelopeResult,
    PushEvent,
    RecoveryOutcome,
    ScenarioConfig,
    SimulationError,
    TrajectoryLog,
    Verdict,
    apply_push,
    classify_outcome,
    max_recoverable_push,
    run_scenario,
    step,
)
from .support import (
    FootGeometry,
    SupportPolygon,
    clamp_cop,
    contains,
    double_support_polygon,
    max_ankle_torque,
    polygon_from_stance,
)

__version__ = "0.1.0"
