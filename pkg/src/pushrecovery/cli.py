"""Command-line harness: run, sweep, envelope and validate scenarios.

Exit codes: 0 success, 1 usage error, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .config import ConfigError, load_config, parse_config, parse_override, with_strategies
from .simulation import (
    ScenarioConfig,
    SimulationError,
    TrajectoryLog,
    edge_impulse,
    max_recoverable_push,
    run_scenario,
)

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

CSV_COLUMNS = (
    "t", "x_c", "y_c", "xd_c", "yd_c", "xi_x", "xi_y", "cop_x", "cop_y", "cmp_x", "cmp_y",
    "hdot_x", "hdot_y", "fly_ang_x", "fly_ang_y", "sat_cop", "sat_fly",
)

# The balancing-strategy ladder, weakest first.
STRATEGIES = (
    ("off", (False, False, False)),
    ("ankle", (True, False, False)),
    ("ankle+hip", (True, True, False)),
    ("ankle+hip+arm", (True, True, True)),
)


class UsageError(Exception):
    pass


@dataclass
class CliRequest:
    subcommand: str
    config_path: str | None = None
    output_dir: str | None = None
    overrides: list = field(default_factory=list)
    quiet: bool = False
    jobs: int = 1


@dataclass
class SummaryReport:
    scenarios: list = field(default_factory=list)
    envelopes: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _fmt(value) -> str:
    if isinstance(value, bool) or getattr(value, "dtype", None) == bool:
        return "1" if value else "0"
    return repr(float(value) + 0.0)  # folds -0.0 into 0.0


def emit_csv(log: TrajectoryLog, path) -> None:
    """Write the trajectory as CSV: a header, then one row per control tick."""
    channels = (log.t[:, None], log.com, log.com_vel, log.xi, log.cop, log.cmp, log.hdot,
                log.fly_angle)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i in range(len(log)):
            row = [_fmt(v) for ch in channels for v in ch[i]]
            row += [_fmt(bool(log.sat_cop[i])), _fmt(bool(log.sat_fly[i]))]
            writer.writerow(row)


def _scenario_summary(name: str, config: ScenarioConfig) -> tuple[dict, TrajectoryLog]:
    start = time.perf_counter()
    log, outcome = run_scenario(config)
    return {
        "name": name,
        "verdict": outcome.verdict.value,
        "max_cp_excursion_m": outcome.max_cp_excursion_m,
        "time_to_settle_s": None if math.isnan(outcome.time_to_settle_s) else outcome.time_to_settle_s,
        "cop_saturated_fraction": outcome.cop_saturated_fraction,
        "runtime_s": time.perf_counter() - start,
    }, log


def _load(request: CliRequest, overrides=None) -> ScenarioConfig:
    overrides = request.overrides if overrides is None else overrides
    if request.config_path is None:
        return parse_config("", overrides)
    path = Path(request.config_path)
    if not path.is_file():
        raise ConfigError("file not found", source=str(path))
    return load_config(path, overrides)


def _out_dir(request: CliRequest) -> Path | None:
    if request.output_dir is None:
        return None
    out = Path(request.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _say(request: CliRequest, text: str) -> None:
    if not request.quiet:
        print(text)


def _cmd_validate(request: CliRequest) -> int:
    _load(request)
    _say(request, f"{request.config_path or '<defaults>'}: ok")
    return EXIT_OK


def _cmd_run(request: CliRequest) -> int:
    config = _load(request)
    summary, log = _scenario_summary("run", config)
    out = _out_dir(request)
    if out is not None:
        emit_csv(log, out / "trajectory.csv")
        (out / "summary.json").write_text(SummaryReport([summary]).to_json(), encoding="utf-8")
    _say(request, f"verdict={summary['verdict']} "
                  f"max_cp_excursion={summary['max_cp_excursion_m']:.6f} m "
                  f"cop_saturated={summary['cop_saturated_fraction']:.3f}")
    return EXIT_OK


def _grid(overrides: list[str]) -> tuple[list[str], list[tuple[str, ...]], list[str]]:
    """Split overrides into fixed ones and comma-separated grid axes."""
    fixed, keys, axes = [], [], []
    for item in overrides:
        section, key, value = parse_override(item)
        values = [v.strip() for v in value.split(",")]
        if len(values) > 1:
            keys.append(f"{section}.{key}")
            axes.append(values)
        else:
            fixed.append(item)
    return keys, list(itertools.product(*axes)), fixed


def _sweep_point(args) -> dict:
    request, overrides, name = args
    summary, _ = _scenario_summary(name, _load(request, overrides))
    return summary


def _cmd_sweep(request: CliRequest) -> int:
    keys, points, fixed = _grid(request.overrides)
    # Validate every grid point before spending time simulating.
    jobs = []
    for point in points:
        overrides = fixed + [f"{k}={v}" for k, v in zip(keys, point)]
        _load(request, overrides)
        jobs.append((request, overrides, ";".join(f"{k}={v}" for k, v in zip(keys, point))))
    out = _out_dir(request)
    fh = open(out / "sweep.csv", "w", newline="", encoding="utf-8") if out else None
    columns = list(keys) + ["verdict", "max_cp_excursion_m", "time_to_settle_s",
                            "cop_saturated_fraction", "runtime_s"]
    writer = csv.writer(fh, lineterminator="\n") if fh else None
    try:
        if writer:
            writer.writerow(columns)
        if request.jobs > 1:
            pool = ProcessPoolExecutor(max_workers=request.jobs)
            results = pool.map(_sweep_point, jobs)
        else:
            pool = None
            results = map(_sweep_point, jobs)
        try:
            # map() yields in submission order, so rows follow the grid order.
            for point, summary in zip(points, results):
                row = list(point) + [summary["verdict"], summary["max_cp_excursion_m"],
                                     summary["time_to_settle_s"],
                                     summary["cop_saturated_fraction"], summary["runtime_s"]]
                if writer:
                    writer.writerow(row)
                    fh.flush()
                _say(request, " ".join(f"{c}={v}" for c, v in zip(columns, row)))
        finally:
            if pool:
                pool.shutdown()
    finally:
        if fh:
            fh.close()
    return EXIT_OK


def _envelope_job(args):
    config, name = args
    start = time.perf_counter()
    result = max_recoverable_push(config)
    return name, result, time.perf_counter() - start


def _cmd_envelope(request: CliRequest) -> int:
    config = _load(request)
    jobs = [(with_strategies(config, *flags), name) for name, flags in STRATEGIES]
    if request.jobs > 1:
        with ProcessPoolExecutor(max_workers=request.jobs) as pool:
            results = list(pool.map(_envelope_job, jobs))
    else:
        results = [_envelope_job(job) for job in jobs]
    direction = config.envelope.direction
    _say(request, f"direction={direction} tolerance={config.envelope.tolerance_Ns} N*s "
                  f"capture-point edge impulse={edge_impulse(config, direction):.6f} N*s")
    _say(request, f"{'strategy':<16}{'max_push_Ns':>14}{'runs':>6}{'runtime_s':>11}")
    report = SummaryReport()
    for name, result, runtime in results:
        flag = " (unbounded at limit)" if result.unbounded else ""
        _say(request, f"{name:<16}{result.impulse_Ns:>14.6f}{result.evaluations:>6}"
                      f"{runtime:>11.2f}{flag}")
        report.envelopes[name] = {"max_push_Ns": result.impulse_Ns,
                                  "unbounded": result.unbounded,
                                  "runtime_s": runtime}
    out = _out_dir(request)
    if out is not None:
        with open(out / "envelope.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["strategy", "max_push_Ns", "unbounded"])
            for name, result, _ in results:
                writer.writerow([name, repr(result.impulse_Ns), int(result.unbounded)])
        (out / "summary.json").write_text(report.to_json(), encoding="utf-8")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "envelope": _cmd_envelope,
            "validate": _cmd_validate}


def run_cli(request: CliRequest) -> int:
    command = COMMANDS.get(request.subcommand)
    if command is None:
        print(f"unknown subcommand {request.subcommand!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return command(request)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, OSError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pushrecovery",
                     description="Capture-point push recovery simulator for a LIPM+flywheel humanoid.")
    parser.add_argument("subcommand", choices=sorted(COMMANDS), metavar="{run,sweep,envelope,validate}")
    parser.add_argument("--config", dest="config_path", help="scenario file (defaults if omitted)")
    parser.add_argument("--out", dest="output_dir", help="directory for CSV and summary output")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE",
                        help="override a config value; comma-separated values form a sweep grid")
    parser.add_argument("--quiet", action="store_true", help="suppress console output")
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    return run_cli(CliRequest(args.subcommand, args.config_path, args.output_dir,
                              args.overrides, args.quiet, args.jobs))


if __name__ == "__main__":
    sys.exit(main())
