"""Closed-loop push-recovery simulation of the LIPM+flywheel.

The plant is integrated with fixed-step RK4 at ``physics_dt``; controller
outputs are recomputed every ``control_dt`` and zero-order held in between.
In position mode the servos are part of the plant, so their torques respond
continuously to the state while their angle commands are held.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .capture_point import CapturePointState
from .controllers import (
    HIP_SIGN,
    UPPER_BODY_JOINTS,
    ControllerConfig,
    _guard_axis,
    ankle_torque_pd,
    cp_error,
    hdot_from_hip_torque,
    hip_torque_pd,
    position_command_pd,
)
from .model import (
    CentroidalState,
    GroundPoint,
    RobotParams,
    _vec2,
    cop_from_ankle_torque,
    natural_frequency,
)
from .support import (
    FootGeometry,
    SupportPolygon,
    clamp_cop,
    double_support_polygon,
    polygon_from_stance,
)

_EPS_T = 1e-9


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PushEvent:
    """External push on the CoM.

    ``duration_s == 0`` is an instantaneous velocity jump of
    ``impulse / mass``; otherwise a constant force ``impulse / duration``
    acts over ``[time_s, time_s + duration_s)``.
    """

    time_s: float
    impulse_Ns: np.ndarray
    duration_s: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "impulse_Ns", _vec2(self.impulse_Ns))
        if not (self.time_s >= 0 and math.isfinite(self.time_s)):
            raise ValueError(f"push time_s must be >= 0, got {self.time_s!r}")
        if not (self.duration_s >= 0 and math.isfinite(self.duration_s)):
            raise ValueError(f"push duration_s must be >= 0, got {self.duration_s!r}")
        if not np.all(np.isfinite(self.impulse_Ns)):
            raise ValueError("push impulse must be finite")

    @property
    def force_N(self) -> np.ndarray:
        if self.duration_s == 0:
            raise ValueError("instantaneous push has no finite force")
        return self.impulse_Ns / self.duration_s


@dataclass(frozen=True)
class EnvelopeSettings:
    direction: tuple = (1.0, 0.0)
    tolerance_Ns: float = 1e-3
    max_impulse_Ns: float = 20.0
    # Used when the scenario has no push to take timing from.
    push_time_s: float = 0.1
    push_duration_s: float = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    robot: RobotParams = field(default_factory=RobotParams)
    foot: FootGeometry = field(default_factory=FootGeometry)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    pushes: tuple = ()
    physics_dt_s: float = 0.001
    control_dt_s: float = 0.01  # 100 Hz
    horizon_s: float = 5.0
    stance: str = "single"  # or "double"
    stance_width_m: float = 0.1
    # None: three foot half-lengths from the polygon center.
    fall_threshold_m: float | None = None
    settle_tol_m: float = 0.005
    settle_window_s: float = 0.5
    initial_com_offset_m: tuple = (0.0, 0.0)
    initial_com_vel_mps: tuple = (0.0, 0.0)
    seed: int = 0  # reserved for noise injection
    envelope: EnvelopeSettings = field(default_factory=EnvelopeSettings)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pushes", tuple(self.pushes))
        for name in ("physics_dt_s", "control_dt_s", "horizon_s", "settle_window_s"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be > 0, got {value!r}")
        ratio = self.control_dt_s / self.physics_dt_s
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise ValueError(
                f"physics_dt_s ({self.physics_dt_s}) must divide control_dt_s ({self.control_dt_s})"
            )
        ticks = self.horizon_s / self.control_dt_s
        if abs(ticks - round(ticks)) > 1e-9 * max(ticks, 1.0):
            raise ValueError(
                f"horizon_s ({self.horizon_s}) must be a multiple of control_dt_s ({self.control_dt_s})"
            )
        if self.stance not in ("single", "double"):
            raise ValueError(f"stance must be 'single' or 'double', got {self.stance!r}")
        if self.settle_tol_m <= 0:
            raise ValueError("settle_tol_m must be > 0")
        if self.fall_threshold_m is not None and self.fall_threshold_m <= 0:
            raise ValueError("fall_threshold_m must be > 0")

    @property
    def polygon(self) -> SupportPolygon:
        if self.stance == "double":
            return double_support_polygon(self.foot, (0.0, 0.0), self.stance_width_m)
        return polygon_from_stance(self.foot, (0.0, 0.0))

    @property
    def ankle_xy(self) -> np.ndarray:
        # Single ankle at the origin; in double support the midpoint of both.
        return np.zeros(2)

    @property
    def xi_ref(self) -> np.ndarray:
        return self.polygon.center

    @property
    def fall_threshold(self) -> float:
        if self.fall_threshold_m is not None:
            return self.fall_threshold_m
        return 3.0 * self.foot.length_m / 2

    @property
    def steps_per_tick(self) -> int:
        return int(round(self.control_dt_s / self.physics_dt_s))

    @property
    def n_ticks(self) -> int:
        return int(round(self.horizon_s / self.control_dt_s))

    def initial_state(self) -> CentroidalState:
        return CentroidalState(self.xi_ref + np.asarray(self.initial_com_offset_m, dtype=float),
                               np.asarray(self.initial_com_vel_mps, dtype=float))


class Verdict(str, Enum):
    RECOVERED = "Recovered"
    FELL = "Fell"
    FLYWHEEL_EXHAUSTED = "FlywheelExhausted"


@dataclass(frozen=True)
class RecoveryOutcome:
    verdict: Verdict
    max_cp_excursion_m: float
    time_to_settle_s: float
    cop_saturated_fraction: float


@dataclass
class TrajectoryLog:
    """One row per control tick. Vector channels have shape ``(n, 2)``."""

    t: np.ndarray
    com: np.ndarray
    com_vel: np.ndarray
    xi: np.ndarray
    cop: np.ndarray
    cmp: np.ndarray
    hdot: np.ndarray
    fly_angle: np.ndarray
    fly_rate: np.ndarray
    joint_cmd: np.ndarray  # (n, 8): ankle, hip, arm, elbow, each (x, y)
    sat_cop: np.ndarray
    sat_fly: np.ndarray
    fly_limit: np.ndarray
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def empty(cls) -> "TrajectoryLog":
        v = np.zeros((0, 2))
        b = np.zeros(0, dtype=bool)
        return cls(np.zeros(0), v, v, v, v, v, v, v, v, np.zeros((0, 8)), b, b, b)


@dataclass(frozen=True)
class SimState:
    """Full simulator state between physics steps."""

    time_s: float
    state: CentroidalState
    command: tuple  # held control: see _Simulator.command
    step_index: int = 0
    previous_xi: tuple | None = None
    applied_pushes: tuple = ()


class _Simulator:
    """Scalar-float implementation of the closed loop.

    Per-axis forms of :func:`com_accel_flywheel`, the servo model and the
    flywheel guard are inlined here for speed; the public functions remain
    the reference and the tests compare the two.
    """

    def __init__(self, config: ScenarioConfig, start: SimState | None = None):
        self.config = config
        robot = config.robot
        ctrl = config.controller
        self.m = robot.mass_kg
        self.z = robot.com_height_m
        self.mg = robot.vertical_force_N
        self.mz = robot.mass_kg * robot.com_height_m
        self.w2 = robot.gravity_mps2 / robot.com_height_m
        self.omega = natural_frequency(robot)
        self.inertia = robot.flywheel_inertia_kgm2
        self.fly_tau = robot.flywheel_torque_limit_Nm
        self.fly_ang = robot.flywheel_angle_limit_rad
        self.polygon = config.polygon
        self.lo = (float(self.polygon.min_xy_m[0]), float(self.polygon.min_xy_m[1]))
        self.hi = (float(self.polygon.max_xy_m[0]), float(self.polygon.max_xy_m[1]))
        self.center = self.polygon.center
        self.ankle = (float(config.ankle_xy[0]), float(config.ankle_xy[1]))
        self.xi_ref = config.xi_ref
        self.position_mode = ctrl.mode == "position"
        self.dt = config.physics_dt_s
        self.steps_per_tick = config.steps_per_tick
        servos = ctrl.servos
        a = servos["ankle"]
        self.ankle_servo = (a.stiffness_Nm_per_rad, a.damping_Nm_s_per_rad, a.torque_limit_Nm)
        self.upper_servos = [
            (ctrl.weights[j], servos[j].stiffness_Nm_per_rad, servos[j].damping_Nm_s_per_rad,
             servos[j].torque_limit_Nm)
            for j in UPPER_BODY_JOINTS
        ]
        self.gains = ctrl.torque_gains(robot)
        self.windows = [
            (p.time_s, p.time_s + p.duration_s, float(p.force_N[0]), float(p.force_N[1]))
            for p in config.pushes if p.duration_s > 0
        ]
        self.impulses = [(i, p) for i, p in enumerate(config.pushes) if p.duration_s == 0]

        if start is None:
            s0 = config.initial_state()
            start = SimState(0.0, s0, self.zero_command())
        s = start.state
        self.y = [float(s.com_pos_m[0]), float(s.com_vel_mps[0]),
                  float(s.com_pos_m[1]), float(s.com_vel_mps[1]),
                  float(s.flywheel_angle_rad[0]), float(s.flywheel_rate_radps[0]),
                  float(s.flywheel_angle_rad[1]), float(s.flywheel_rate_radps[1])]
        self.k = start.step_index
        self.command = start.command
        self.previous_xi = start.previous_xi
        self.applied = set(start.applied_pushes)
        self.held_flags = (False, False, False)

    # --- plant -------------------------------------------------------------

    def zero_command(self) -> tuple:
        if self.position_mode:
            return (0.0,) * 8  # ankle, hip, arm, elbow joint angles, each (x, y)
        return (self.ankle[0], self.ankle[1], 0.0, 0.0)  # CoP xy, Hdot xy

    def external_force(self, t: float) -> tuple[float, float]:
        fx = fy = 0.0
        for start, end, wx, wy in self.windows:
            if start <= t < end:
                fx += wx
                fy += wy
        return fx, fy

    def inputs(self, y) -> tuple:
        """CoP, Hdot and saturation flags produced by the held command at ``y``."""
        c = self.command
        if not self.position_mode:
            return (c[0], c[1], c[2], c[3]) + self.held_flags
        x, vx, yy, vy, phx, wx, phy, wy = y
        z, mg = self.z, self.mg
        K, D, lim = self.ankle_servo
        # Ankle angle reads minus the body lean, so the passive servo pushes
        # the CoP toward the CoM.
        tau_y = K * (c[1] + (x - self.ankle[0]) / z) + D * vx / z
        tau_x = K * (c[0] + (yy - self.ankle[1]) / z) + D * vy / z
        tau_y = min(max(tau_y, -lim), lim)
        tau_x = min(max(tau_x, -lim), lim)
        px_raw = self.ankle[0] + tau_y / mg
        py_raw = self.ankle[1] + tau_x / mg
        px = min(max(px_raw, self.lo[0]), self.hi[0])
        py = min(max(py_raw, self.lo[1]), self.hi[1])
        sat_cop = px != px_raw or py != py_raw

        hdot = [0.0, 0.0]
        sat_fly = fly_lim = False
        for axis, (ang, rate) in enumerate(((phx, wx), (phy, wy))):
            s = HIP_SIGN[axis]
            q, qd = s * ang, s * rate
            tau = 0.0
            for j, (w, Kj, Dj, limj) in enumerate(self.upper_servos):
                if w == 0.0:
                    continue
                tj = Kj * (c[2 + 2 * j + axis] - q) - Dj * qd
                tau += w * min(max(tj, -limj), limj)
            h, ts, al = _guard_axis(s * tau, ang, rate, self.inertia, self.fly_tau, self.fly_ang)
            hdot[axis] = h
            sat_fly |= ts or al
            fly_lim |= al
        return px, py, hdot[0], hdot[1], sat_cop, sat_fly, fly_lim

    def rates(self, y, force: tuple[float, float]) -> list:
        px, py, hx, hy, *_ = self.inputs(y)
        fx, fy = force
        w2, mz, m, inertia = self.w2, self.mz, self.m, self.inertia
        return [
            y[1], w2 * (y[0] - px) - hy / mz + fx / m,
            y[3], w2 * (y[2] - py) + hx / mz + fy / m,
            y[5], hx / inertia,
            y[7], hy / inertia,
        ]

    def rk4(self, t: float, y: list, h: float) -> list:
        # Push forces are piecewise constant; sampling them once at the step
        # midpoint keeps a window that starts on a step boundary out of the
        # preceding step's final stage.
        force = self.external_force(t + 0.5 * h)
        k1 = self.rates(y, force)
        y2 = [a + 0.5 * h * b for a, b in zip(y, k1)]
        k2 = self.rates(y2, force)
        y3 = [a + 0.5 * h * b for a, b in zip(y, k2)]
        k3 = self.rates(y3, force)
        y4 = [a + h * b for a, b in zip(y, k3)]
        k4 = self.rates(y4, force)
        return [a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]

    # --- control -----------------------------------------------------------

    def centroidal(self) -> CentroidalState:
        y = self.y
        return CentroidalState((y[0], y[2]), (y[1], y[3]), (y[4], y[6]), (y[5], y[7]))

    def apply_due_impulses(self, t: float) -> None:
        for i, push in self.impulses:
            if i not in self.applied and push.time_s <= t + _EPS_T:
                self.y[1] += float(push.impulse_Ns[0]) / self.m
                self.y[3] += float(push.impulse_Ns[1]) / self.m
                self.applied.add(i)

    def xi(self) -> tuple[float, float]:
        y, w = self.y, self.omega
        return y[0] + y[1] / w, y[2] + y[3] / w

    def measured_xi_rate(self) -> np.ndarray:
        """CP rate seen by the controller, from the CP law with the CMP
        currently applied; external forces are not measured."""
        px, py, hx, hy, *_ = self.inputs(self.y)
        cmp_x = px + hy / self.mg
        cmp_y = py - hx / self.mg
        xi = self.xi()
        return np.array([self.omega * (xi[0] - cmp_x), self.omega * (xi[1] - cmp_y)])

    def update_command(self) -> None:
        if not all(math.isfinite(v) for v in self.y):
            raise SimulationError(f"non-finite state at t={self.time():.6f}s: {self.y}")
        ctrl = self.config.controller
        robot = self.config.robot
        xi = np.array(self.xi())
        if ctrl.rate_mode == "finite_difference" and self.previous_xi is not None:
            rate = (xi - np.array(self.previous_xi)) / self.config.control_dt_s
        else:
            rate = self.measured_xi_rate()
        self.previous_xi = (float(xi[0]), float(xi[1]))
        # Feed back measured - reference: with CoP = tau / (m g) a positive
        # torque then moves the CoP (and CMP) toward the CP, which is what
        # makes the loop stable.
        e = -cp_error(CapturePointState(self.xi_ref), CapturePointState(xi), (0.0, 0.0), rate)
        if self.position_mode:
            cmd = position_command_pd(e, ctrl.position_gains, ctrl, robot)
            self.command = tuple(float(v) for j in ("ankle", "hip", "arm", "elbow")
                                 for v in cmd.joint(j))
            return
        ankle_gains, hip_gains = self.gains
        cop = np.array(self.ankle)
        sat_cop = sat_fly = fly_lim = False
        if ctrl.ankle:
            tau, raw = ankle_torque_pd(e, ankle_gains, self.polygon, robot, self.ankle,
                                       return_raw=True)
            sat_cop = bool(np.any(tau != raw))
            offset = cop_from_ankle_torque(tau, robot).xy_m
            cop = clamp_cop(GroundPoint(cop + offset), self.polygon).xy_m
        hdot = np.zeros(2)
        if ctrl.hip:
            y = self.y
            tau_hip, sat_fly, fly_lim = hip_torque_pd(
                e, hip_gains, robot, (y[4], y[6]), (y[5], y[7]), return_flags=True)
            sat_fly = sat_fly or fly_lim
            hdot = hdot_from_hip_torque(tau_hip)
        self.command = (float(cop[0]), float(cop[1]), float(hdot[0]), float(hdot[1]))
        self.held_flags = (sat_cop, sat_fly, fly_lim)

    def command_as_joints(self) -> tuple:
        return self.command if self.position_mode else (0.0,) * 8

    # --- stepping ----------------------------------------------------------

    def time(self) -> float:
        return self.k * self.dt

    def advance(self) -> tuple[bool, bool, bool]:
        """One physics step, recomputing control on tick boundaries."""
        t = self.time()
        self.apply_due_impulses(t)
        if self.k % self.steps_per_tick == 0:
            self.update_command()
        flags = self.inputs(self.y)[4:]
        self.y = self.rk4(t, self.y, self.dt)
        self.k += 1
        return flags

    def snapshot(self) -> SimState:
        return SimState(self.time(), self.centroidal(), self.command, self.k,
                        self.previous_xi, tuple(sorted(self.applied)))


def step(sim: SimState, config: ScenarioConfig, physics_dt: float | None = None) -> SimState:
    """Advance ``sim`` by one physics step of ``config``.

    Pushes due at the current time are applied first and the controller is
    re-evaluated when the step starts on a control tick.
    """
    if physics_dt is not None and physics_dt != config.physics_dt_s:
        config = replace(config, physics_dt_s=physics_dt)
    runner = _Simulator(config, sim)
    runner.advance()
    if not all(math.isfinite(v) for v in runner.y):
        raise SimulationError(f"non-finite state after step at t={runner.time():.6f}s: {runner.y}")
    return runner.snapshot()


def initial_sim_state(config: ScenarioConfig) -> SimState:
    return _Simulator(config).snapshot()


def apply_push(state: CentroidalState, push: PushEvent, params: RobotParams):
    """Apply ``push`` to ``state``.

    Instantaneous pushes return the new state; windowed pushes return the
    ``(start, end, force)`` schedule the integrator adds to the dynamics.
    """
    if push.duration_s == 0:
        return replace(state, com_vel_mps=state.com_vel_mps + push.impulse_Ns / params.mass_kg)
    return (push.time_s, push.time_s + push.duration_s, push.force_N)


def _simulate(config: ScenarioConfig, stop_on_fall: bool = False) -> TrajectoryLog:
    sim = _Simulator(config)
    n_ticks = config.n_ticks
    per_tick = sim.steps_per_tick
    threshold = config.fall_threshold
    cx, cy = float(sim.center[0]), float(sim.center[1])
    w = sim.omega
    rows = []
    truncated = False
    acc = [False, False, False]
    for tick in range(n_ticks + 1):
        t = sim.time()
        sim.apply_due_impulses(t)
        sim.update_command()
        y = sim.y
        px, py, hx, hy, sc, sf, fl = sim.inputs(y)
        flags = (acc[0] or sc, acc[1] or sf, acc[2] or fl)
        rows.append((t, y[0], y[2], y[1], y[3], y[0] + y[1] / w, y[2] + y[3] / w,
                     px, py, px + hy / sim.mg, py - hx / sim.mg, hx, hy,
                     y[4], y[6], y[5], y[7]) + tuple(sim.command_as_joints()) + flags)
        acc = [False, False, False]
        if stop_on_fall and math.hypot(y[0] - cx, y[2] - cy) > threshold:
            truncated = tick < n_ticks
            break
        if tick == n_ticks:
            break
        for j in range(per_tick):
            if j:
                sim.apply_due_impulses(sim.time())
                f = sim.inputs(sim.y)[4:]
                acc = [a or b for a, b in zip(acc, f)]
            sim.y = sim.rk4(sim.time(), sim.y, sim.dt)
            sim.k += 1
    return _rows_to_log(rows, truncated)


def _rows_to_log(rows: list, truncated: bool) -> TrajectoryLog:
    if not rows:
        return TrajectoryLog.empty()
    a = np.array([r[:-3] for r in rows], dtype=float)
    b = np.array([r[-3:] for r in rows], dtype=bool)
    return TrajectoryLog(
        t=a[:, 0], com=a[:, 1:3], com_vel=a[:, 3:5], xi=a[:, 5:7], cop=a[:, 7:9],
        cmp=a[:, 9:11], hdot=a[:, 11:13], fly_angle=a[:, 13:15], fly_rate=a[:, 15:17],
        joint_cmd=a[:, 17:25], sat_cop=b[:, 0], sat_fly=b[:, 1], fly_limit=b[:, 2],
        truncated=truncated,
    )


def classify_outcome(log: TrajectoryLog, config: ScenarioConfig) -> RecoveryOutcome:
    """Classify a run; the first matching verdict wins.

    1. Fell: the CoM strayed beyond the fall threshold, the CP grew
       monotonically over the final settle window, or the run never settled.
    2. FlywheelExhausted: the flywheel angle limit engaged while the CP was
       outside the support polygon.
    3. Recovered: the CP stayed within the settle tolerance of the reference
       over the final settle window.
    """
    if len(log) == 0:
        raise ValueError("cannot classify an empty trajectory log")
    polygon = config.polygon
    xi_ref = config.xi_ref
    dist = np.hypot(*(log.xi - xi_ref).T)
    com_dist = np.hypot(*(log.com - polygon.center).T)
    excursion = float(dist.max())
    sat_frac = float(np.mean(log.sat_cop))
    t_end = float(log.t[-1])
    window = log.t >= t_end - config.settle_window_s - _EPS_T
    tail = dist[window]
    diverging = len(tail) >= 2 and bool(np.all(np.diff(tail) > 0)) and tail[-1] > config.settle_tol_m
    first_push = min((p.time_s for p in config.pushes), default=0.0)

    if log.truncated or bool(np.any(com_dist > config.fall_threshold)) or diverging:
        return RecoveryOutcome(Verdict.FELL, excursion, math.nan, sat_frac)
    inside = np.all((log.xi >= polygon.min_xy_m) & (log.xi <= polygon.max_xy_m), axis=1)
    if bool(np.any(log.fly_limit & ~inside)):
        return RecoveryOutcome(Verdict.FLYWHEEL_EXHAUSTED, excursion, math.nan, sat_frac)
    if t_end >= config.settle_window_s - _EPS_T and float(tail.max()) < config.settle_tol_m:
        outside = np.nonzero(dist >= config.settle_tol_m)[0]
        settled_at = 0.0 if len(outside) == 0 else float(log.t[outside[-1] + 1])
        return RecoveryOutcome(Verdict.RECOVERED, excursion,
                               max(settled_at - first_push, 0.0), sat_frac)
    return RecoveryOutcome(Verdict.FELL, excursion, math.nan, sat_frac)


def run_scenario(config: ScenarioConfig) -> tuple[TrajectoryLog, RecoveryOutcome]:
    """Simulate the full horizon and classify the result. Deterministic."""
    log = _simulate(config)
    return log, classify_outcome(log, config)


def is_recovered(config: ScenarioConfig) -> bool:
    """Fast verdict check that stops integrating once the robot has fallen."""
    log = _simulate(config, stop_on_fall=True)
    return classify_outcome(log, config).verdict is Verdict.RECOVERED


@dataclass(frozen=True)
class EnvelopeResult:
    impulse_Ns: float
    upper_Ns: float  # smallest magnitude seen to fail
    unbounded: bool = False
    evaluations: int = 0

    def __float__(self) -> float:
        return self.impulse_Ns


def edge_impulse(config: ScenarioConfig, direction) -> float:
    """Impulse that puts the CP of a robot at rest on the polygon edge."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    half = config.polygon.half_extent
    with np.errstate(divide="ignore"):
        reach = np.min(np.where(d != 0, half / np.abs(d), np.inf))
    return config.robot.mass_kg * natural_frequency(config.robot) * float(reach)


def with_push(config: ScenarioConfig, impulse_Ns, time_s: float | None = None,
              duration_s: float | None = None) -> ScenarioConfig:
    """Copy of ``config`` with its pushes replaced by a single push."""
    template = config.pushes[0] if config.pushes else None
    if time_s is None:
        time_s = template.time_s if template else config.envelope.push_time_s
    if duration_s is None:
        duration_s = template.duration_s if template else config.envelope.push_duration_s
    return replace(config, pushes=(PushEvent(time_s, impulse_Ns, duration_s),))


def max_recoverable_push(config: ScenarioConfig, direction=None,
                         tolerance_Ns: float | None = None) -> EnvelopeResult:
    """Largest push magnitude along ``direction`` that ends Recovered.

    Brackets the boundary by growing a failing magnitude from the analytic
    capture-point edge impulse, then bisects to ``tolerance_Ns``. The push
    timing comes from the scenario's first push.
    """
    settings = config.envelope
    direction = settings.direction if direction is None else direction
    tolerance_Ns = settings.tolerance_Ns if tolerance_Ns is None else tolerance_Ns
    if not tolerance_Ns > 0:
        raise ValueError("tolerance_Ns must be > 0")
    d = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(d))
    if not norm > 0:
        raise ValueError("direction must be non-zero")
    d = d / norm
    limit = settings.max_impulse_Ns
    evaluations = 0

    def recovered(magnitude: float) -> bool:
        nonlocal evaluations
        evaluations += 1
        return is_recovered(with_push(config, magnitude * d))

    if not recovered(0.0):
        return EnvelopeResult(0.0, 0.0, False, evaluations)
    lo, hi = 0.0, min(1.25 * edge_impulse(config, d), limit)
    while recovered(hi):
        lo = hi
        if hi >= limit:
            return EnvelopeResult(limit, math.inf, True, evaluations)
        hi = min(1.5 * hi, limit)
    while hi - lo > tolerance_Ns:
        mid = 0.5 * (lo + hi)
        if recovered(mid):
            lo = mid
        else:
            hi = mid
    return EnvelopeResult(lo, hi, False, evaluations)
