"""Scenario files: a line-oriented ``key = value`` format with sections.

Example::

    # default robot, one sagittal push
    [robot]
    mass_kg = 3.6

    [push]
    time_s = 0.1
    impulse_x_Ns = 1.6
    duration_s = 0.05

Any number of push sections may be given as ``[push]``, ``[push.b]``, ...
Omitted keys keep their defaults (a 3.6 kg robot with a 0.35 m CoM
height on a 0.15 x 0.08 m foot). Overrides use ``section.key=value``;
they beat the file, which beats the defaults.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .controllers import (
    JOINTS,
    UPPER_BODY_JOINTS,
    ControllerConfig,
    PdGains,
    ServoParams,
    default_joint_limits,
    default_position_gains,
    default_servos,
    default_weights,
)
from .model import RobotParams
from .simulation import EnvelopeSettings, PushEvent, ScenarioConfig
from .support import FootGeometry


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "config"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_.\-]+)\s*\]$")
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}

_ROBOT_KEYS = {
    "mass_kg": float, "com_height_m": float, "gravity_mps2": float,
    "flywheel_inertia_kgm2": float, "flywheel_angle_limit_rad": float,
    "flywheel_torque_limit_Nm": float,
}
_FOOT_KEYS = {"length_m": float, "width_m": float, "ankle_offset_x_m": float,
              "ankle_offset_y_m": float}
_SIM_KEYS = {
    "physics_dt_s": float, "control_dt_s": float, "horizon_s": float, "stance": str,
    "stance_width_m": float, "fall_threshold_m": float, "settle_tol_m": float,
    "settle_window_s": float, "initial_com_x_m": float, "initial_com_y_m": float,
    "initial_vel_x_mps": float, "initial_vel_y_mps": float, "seed": int,
}
_PUSH_KEYS = {"time_s": float, "impulse_x_Ns": float, "impulse_y_Ns": float, "duration_s": float}
_ENVELOPE_KEYS = {
    "direction_x": float, "direction_y": float, "tolerance_Ns": float,
    "max_impulse_Ns": float, "push_time_s": float, "push_duration_s": float,
}
_CONTROLLER_KEYS = {
    "mode": str, "ankle": bool, "hip": bool, "arm": bool, "rate_mode": str,
    "ankle_torque_kp": float, "ankle_torque_kd": float,
    "hip_torque_kp": float, "hip_torque_kd": float,
}
for _j in JOINTS:
    _CONTROLLER_KEYS.update({
        f"{_j}_kp": float, f"{_j}_kd": float, f"{_j}_stiffness": float,
        f"{_j}_damping": float, f"{_j}_torque_limit": float, f"{_j}_limit_rad": float,
    })
for _j in UPPER_BODY_JOINTS:
    _CONTROLLER_KEYS[f"{_j}_weight"] = float

SCHEMA = {
    "robot": _ROBOT_KEYS, "foot": _FOOT_KEYS, "sim": _SIM_KEYS,
    "controller": _CONTROLLER_KEYS, "envelope": _ENVELOPE_KEYS, "push": _PUSH_KEYS,
}


@dataclass
class _Entry:
    raw: str
    line: int | None
    source: str


def _schema_for(section: str) -> dict:
    if section == "push" or section.startswith("push."):
        return _PUSH_KEYS
    return SCHEMA.get(section)


def _convert(entry: _Entry, kind, key: str):
    raw = entry.raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {raw!r}", entry.line,
                          entry.source) from None


def _read(text: str, source: str) -> dict[str, dict[str, _Entry]]:
    sections: dict[str, dict[str, _Entry]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _SECTION.match(stripped)
        if m:
            current = m.group(1)
            if _schema_for(current) is None:
                raise ConfigError(f"unknown section [{current}]", lineno, source)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", lineno, source)
            sections[current] = {}
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno, source)
        if current is None:
            raise ConfigError("key outside of any [section]", lineno, source)
        key, value = (s.strip() for s in stripped.split("=", 1))
        if key not in _schema_for(current):
            raise ConfigError(f"unknown key {key!r} in [{current}]", lineno, source)
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno, source)
        sections[current][key] = _Entry(value, lineno, source)
    return sections


def parse_override(item: str) -> tuple[str, str, str]:
    """Split ``section.key=value`` (the section may itself contain dots)."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form section.key=value",
                          source="--set")
    path, value = item.split("=", 1)
    path = path.strip()
    if "." not in path:
        raise ConfigError(f"override {item!r} needs a section: section.key=value",
                          source="--set")
    section, key = path.rsplit(".", 1)
    return section, key, value.strip()


def _apply_overrides(sections: dict, overrides) -> None:
    for item in overrides or ():
        section, key, value = parse_override(item)
        schema = _schema_for(section)
        if schema is None:
            raise ConfigError(f"unknown section [{section}] in override {item!r}", source="--set")
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in [{section}] (override {item!r})",
                              source="--set")
        sections.setdefault(section, {})[key] = _Entry(value, None, "--set")


class _Section:
    """Typed view of one parsed section that remembers where values came from."""

    def __init__(self, name: str, entries: dict[str, _Entry]):
        self.name = name
        self.entries = entries
        self.schema = _schema_for(name)

    def get(self, key: str, default=None):
        entry = self.entries.get(key)
        if entry is None:
            return default
        return _convert(entry, self.schema[key], key)

    def fail(self, message: str, *keys: str) -> ConfigError:
        for key in keys:
            entry = self.entries.get(key)
            if entry is not None:
                return ConfigError(f"[{self.name}] {message}", entry.line, entry.source)
        return ConfigError(f"[{self.name}] {message}")


def _build(section: _Section, factory, field_keys: dict[str, str], **kwargs):
    """Call ``factory`` and attribute invariant violations to the offending key."""
    try:
        return factory(**kwargs)
    except ValueError as exc:
        message = str(exc)
        keys = [k for f, k in field_keys.items() if f in message] or list(section.entries)
        raise section.fail(message, *keys) from None


def parse_config(text: str, overrides=(), source: str = "config") -> ScenarioConfig:
    """Parse scenario text into a validated :class:`ScenarioConfig`."""
    sections = _read(text, source)
    _apply_overrides(sections, overrides)
    view = {name: _Section(name, entries) for name, entries in sections.items()}
    empty = lambda name: _Section(name, {})  # noqa: E731

    r = view.get("robot") or empty("robot")
    defaults = RobotParams()
    robot_kwargs = {k: r.get(k, getattr(defaults, k)) for k in _ROBOT_KEYS}
    robot = _build(r, RobotParams, {k: k for k in _ROBOT_KEYS}, **robot_kwargs)

    f = view.get("foot") or empty("foot")
    foot = _build(
        f, FootGeometry,
        {"length_m": "length_m", "width_m": "width_m",
         "ankle_offset": "ankle_offset_x_m"},
        length_m=f.get("length_m", 0.15), width_m=f.get("width_m", 0.08),
        ankle_offset_m=(f.get("ankle_offset_x_m", 0.0), f.get("ankle_offset_y_m", 0.0)),
    )

    controller = _parse_controller(view.get("controller") or empty("controller"))

    pushes = []
    for name, sec in view.items():
        if name == "push" or name.startswith("push."):
            pushes.append(_build(
                sec, PushEvent,
                {"time_s": "time_s", "duration_s": "duration_s", "impulse": "impulse_x_Ns"},
                time_s=sec.get("time_s", 0.1),
                impulse_Ns=(sec.get("impulse_x_Ns", 0.0), sec.get("impulse_y_Ns", 0.0)),
                duration_s=sec.get("duration_s", 0.0),
            ))

    e = view.get("envelope") or empty("envelope")
    env_defaults = EnvelopeSettings()
    direction = (e.get("direction_x", env_defaults.direction[0]),
                 e.get("direction_y", env_defaults.direction[1]))
    if direction == (0.0, 0.0):
        raise e.fail("direction must be non-zero", "direction_x", "direction_y")
    tolerance = e.get("tolerance_Ns", env_defaults.tolerance_Ns)
    if not tolerance > 0:
        raise e.fail("tolerance_Ns must be > 0", "tolerance_Ns")
    max_impulse = e.get("max_impulse_Ns", env_defaults.max_impulse_Ns)
    if not max_impulse > 0:
        raise e.fail("max_impulse_Ns must be > 0", "max_impulse_Ns")
    envelope = EnvelopeSettings(
        direction, tolerance, max_impulse,
        e.get("push_time_s", env_defaults.push_time_s),
        e.get("push_duration_s", env_defaults.push_duration_s),
    )

    s = view.get("sim") or empty("sim")
    sim_defaults = ScenarioConfig()
    sim_fields = {
        "physics_dt_s": "physics_dt_s", "control_dt_s": "control_dt_s", "horizon_s": "horizon_s",
        "stance": "stance", "settle_tol_m": "settle_tol_m", "fall_threshold_m": "fall_threshold_m",
        "settle_window_s": "settle_window_s",
    }
    return _build(
        s, ScenarioConfig, sim_fields,
        robot=robot, foot=foot, controller=controller, pushes=tuple(pushes),
        physics_dt_s=s.get("physics_dt_s", sim_defaults.physics_dt_s),
        control_dt_s=s.get("control_dt_s", sim_defaults.control_dt_s),
        horizon_s=s.get("horizon_s", sim_defaults.horizon_s),
        stance=s.get("stance", sim_defaults.stance),
        stance_width_m=s.get("stance_width_m", sim_defaults.stance_width_m),
        fall_threshold_m=s.get("fall_threshold_m", None),
        settle_tol_m=s.get("settle_tol_m", sim_defaults.settle_tol_m),
        settle_window_s=s.get("settle_window_s", sim_defaults.settle_window_s),
        initial_com_offset_m=(s.get("initial_com_x_m", 0.0), s.get("initial_com_y_m", 0.0)),
        initial_com_vel_mps=(s.get("initial_vel_x_mps", 0.0), s.get("initial_vel_y_mps", 0.0)),
        seed=s.get("seed", 0),
        envelope=envelope,
    )


def _parse_controller(c: _Section) -> ControllerConfig:
    def gains(prefix: str, default: PdGains | None) -> PdGains | None:
        kp = c.get(f"{prefix}_kp")
        kd = c.get(f"{prefix}_kd")
        if kp is None and kd is None:
            return default
        base = default or PdGains(0.0, 0.0)
        return _build(c, PdGains, {"kp": f"{prefix}_kp", "kd": f"{prefix}_kd"},
                      kp=base.kp if kp is None else kp, kd=base.kd if kd is None else kd)

    position_gains = default_position_gains()
    servos = default_servos()
    for joint in JOINTS:
        position_gains[joint] = gains(joint, position_gains[joint])
        s = servos[joint]
        servos[joint] = _build(
            c, ServoParams,
            {"stiffness": f"{joint}_stiffness", "damping": f"{joint}_damping",
             "torque_limit": f"{joint}_torque_limit"},
            stiffness_Nm_per_rad=c.get(f"{joint}_stiffness", s.stiffness_Nm_per_rad),
            damping_Nm_s_per_rad=c.get(f"{joint}_damping", s.damping_Nm_s_per_rad),
            torque_limit_Nm=c.get(f"{joint}_torque_limit", s.torque_limit_Nm),
        )
    weights = default_weights()
    for joint in UPPER_BODY_JOINTS:
        weights[joint] = c.get(f"{joint}_weight", weights[joint])
    limits = default_joint_limits()
    for joint in JOINTS:
        limits[joint] = c.get(f"{joint}_limit_rad", limits[joint])

    field_keys = {"mode": "mode", "rate_mode": "rate_mode"}
    field_keys.update({f"weight for {j}": f"{j}_weight" for j in UPPER_BODY_JOINTS})
    field_keys.update({f"joint limit for {j}": f"{j}_limit_rad" for j in JOINTS})
    defaults = ControllerConfig()
    return _build(
        c, ControllerConfig, field_keys,
        mode=c.get("mode", defaults.mode),
        ankle=c.get("ankle", defaults.ankle),
        hip=c.get("hip", defaults.hip),
        arm=c.get("arm", defaults.arm),
        rate_mode=c.get("rate_mode", defaults.rate_mode),
        ankle_torque_gains=gains("ankle_torque", None),
        hip_torque_gains=gains("hip_torque", None),
        position_gains=position_gains,
        servos=servos,
        weights=weights,
        joint_limits=limits,
    )


def load_config(path, overrides=()) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, overrides, source=str(path))


def with_strategies(config: ScenarioConfig, ankle: bool, hip: bool, arm: bool) -> ScenarioConfig:
    return replace(config, controller=replace(config.controller, ankle=ankle, hip=hip, arm=arm))
