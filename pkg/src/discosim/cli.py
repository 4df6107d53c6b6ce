"""Config-driven experiment runner: benchmark x sweep grids to CSV.

A sweep varies one axis (per-user transmit power in dBm, or the distance
between the access point and the reflecting surface in meters) and evaluates
a list of benchmarks at every grid point. Streams derive only from
(master_seed, trial, purpose), so all benchmarks at a grid point see the
same channel draws and curves can be compared pairwise per trial.

Two presets reproduce the standard case study: ``fig4`` (rate vs power) and
``fig6`` (rate vs surface distance).
"""

from __future__ import annotations

import argparse
import csv as _csv
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass

from . import simcore as sim
from .dirs import case_one
from .errors import ConfigError
from .scenario import (
    D_MIN_M,
    FrameSchedule,
    PathLossParams,
    Position3D,
    ScenarioConfig,
    distance,
    scenario_from_dict,
)

SWEEP_AXES = ("power_dbm_per_lu", "ap_dirs_distance_m")

CSV_HEADER = ("axis", "axis_value", "benchmark", "mean_rate", "ci95", "n_trials", "seed")

OUT_DIR_ENV = "DISCOSIM_OUT_DIR"


@dataclass(frozen=True)
class SweepSpec:
    """One sweep axis with its grid values and benchmark list."""

    axis: str
    values: tuple[float, ...]
    benchmarks: tuple[str, ...]

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}")
        if len(self.values) == 0:
            raise ConfigError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        if len(self.benchmarks) == 0:
            raise ConfigError("sweep benchmarks must be non-empty")
        for name in self.benchmarks:
            sim.benchmark(name)  # raises on unknown names


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    benchmark: str
    mean_rate: float
    ci95: float
    n_trials: int
    seed: int


@dataclass(frozen=True)
class SweepResult:
    axis: str
    rows: tuple[SweepRow, ...]


def apply_axis(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    """Scenario with one grid point applied.

    The power axis is per-user transmit power in dBm (total = value + 10
    log10 K); the distance axis moves the reflecting surface to (-d, 0, 5).
    """
    if axis == "power_dbm_per_lu":
        if not math.isfinite(value):
            raise ConfigError(f"power grid value must be finite, got {value}")
        total = value + 10.0 * math.log10(cfg.n_users)
        return dataclasses.replace(cfg, total_power_dbm=total)
    if axis == "ap_dirs_distance_m":
        new_pos = Position3D(-value, 0.0, 5.0)
        if distance(cfg.ap_pos, new_pos) < D_MIN_M:
            raise ConfigError(
                f"distance grid value {value} puts the surface inside the "
                f"near-field clamp ({D_MIN_M} m)"
            )
        return dataclasses.replace(cfg, dirs_pos=new_pos)
    raise ConfigError(f"unknown sweep axis '{axis}'")


def run_sweep(
    cfg: ScenarioConfig,
    spec: SweepSpec,
    progress=None,
    trace_sink=None,
) -> SweepResult:
    """Evaluate every (grid value, benchmark) cell; rows ordered by
    (axis_value ascending, benchmark list order).

    All grid points are validated before any computation starts, so an
    invalid override fails fast naming the grid point.
    """
    point_cfgs = []
    for v in spec.values:
        try:
            point_cfgs.append(apply_axis(cfg, spec.axis, v))
        except ConfigError as exc:
            raise ConfigError(f"grid point {spec.axis}={v}: {exc}") from None

    rows = []
    total = len(spec.values) * len(spec.benchmarks)
    done = 0
    for v, cfg_v in zip(spec.values, point_cfgs):
        for name in spec.benchmarks:
            bench = sim.benchmark(name)
            sink = None
            if trace_sink is not None:
                sink = lambda t, res, _v=v, _n=name: trace_sink(_v, _n, t, res)
            try:
                summary = sim.ergodic_rates(cfg_v, bench, trace_sink=sink)
            except Exception as exc:
                raise RuntimeError(
                    f"grid point {spec.axis}={v}, benchmark '{name}': {exc}"
                ) from exc
            rows.append(
                SweepRow(
                    axis_value=float(v),
                    benchmark=name,
                    mean_rate=summary.mean_rate,
                    ci95=summary.ci95_halfwidth,
                    n_trials=summary.n_trials,
                    seed=cfg.master_seed,
                )
            )
            done += 1
            if progress is not None:
                progress(done, total, rows[-1])
    return SweepResult(axis=spec.axis, rows=tuple(rows))


def _fmt(x: float) -> str:
    # repr of a float is the shortest decimal that parses back exactly, and
    # always carries at least the 9 significant digits the format requires
    return repr(float(x))


def emit_csv(res: SweepResult, path) -> None:
    """Write the sweep result; byte output is deterministic for a given result."""
    lines = [",".join(CSV_HEADER)]
    for r in res.rows:
        lines.append(
            f"{res.axis},{_fmt(r.axis_value)},{r.benchmark},"
            f"{_fmt(r.mean_rate)},{_fmt(r.ci95)},{r.n_trials},{r.seed}"
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_csv(path) -> SweepResult:
    """Inverse of :func:`emit_csv` (exact within decimal representation)."""
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ConfigError(f"unexpected CSV header in {path}: {header}")
        axis = None
        rows = []
        for line in reader:
            if len(line) != len(CSV_HEADER):
                raise ConfigError(f"malformed CSV row in {path}: {line}")
            if axis is None:
                axis = line[0]
            elif line[0] != axis:
                raise ConfigError(f"inconsistent axis column in {path}")
            rows.append(
                SweepRow(
                    axis_value=float(line[1]),
                    benchmark=line[2],
                    mean_rate=float(line[3]),
                    ci95=float(line[4]),
                    n_trials=int(line[5]),
                    seed=int(line[6]),
                )
            )
    return SweepResult(axis=axis if axis is not None else "", rows=tuple(rows))


# ---------------------------------------------------------------------------
# Presets reproducing the standard case study at desk scale.
# ---------------------------------------------------------------------------

def _base_scenario(**overrides) -> ScenarioConfig:
    defaults = dict(
        n_ap_antennas=16,
        n_dirs_elements=2048,
        n_users=12,
        ap_pos=Position3D(0.0, 0.0, 5.0),
        dirs_pos=Position3D(-2.0, 0.0, 5.0),
        aj_pos=Position3D(-2.0, 0.0, 5.0),
        lu_region_center=Position3D(0.0, 180.0, 0.0),
        lu_region_radius=20.0,
        total_power_dbm=-2.0 + 10.0 * math.log10(12.0),
        noise_power_dbm=-112.0,
        aj_power_dbm=-4.0,
        frame=FrameSchedule(t_p_slots=12, c_ratio=9, q_changes=9, m_feedbacks=2),
        phase_dist=case_one(),
        dirs_mode="persistent",
        path_loss=PathLossParams(),
        n_trials=1000,
        master_seed=857536,
        detection_threshold_db=0.0,
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


def preset_fig4() -> tuple[ScenarioConfig, SweepSpec]:
    """Rate vs per-user transmit power, six benchmarks, -10..4 dBm."""
    cfg = _base_scenario()
    spec = SweepSpec(
        axis="power_dbm_per_lu",
        values=tuple(float(v) for v in range(-10, 5, 2)),
        benchmarks=(
            "no_jamming_zf",
            "fpj_zf_case1",
            "fpj_zf_case2",
            "fpj_ajp_case1",
            "fpj_ajp_case2",
            "aj_zf",
        ),
    )
    return cfg, spec


def preset_fig6() -> tuple[ScenarioConfig, SweepSpec]:
    """Rate vs AP-surface distance at -2 dBm per user."""
    cfg = _base_scenario()
    spec = SweepSpec(
        axis="ap_dirs_distance_m",
        values=tuple(float(v) for v in range(2, 21, 2)),
        benchmarks=(
            "no_jamming_zf",
            "fpj_zf_case1",
            "fpj_zf_case2",
            "fpj_ajp_case1",
            "fpj_ajp_case2",
        ),
    )
    return cfg, spec


PRESETS = {"fig4": preset_fig4, "fig6": preset_fig6}


def load_config_file(path) -> tuple[ScenarioConfig, SweepSpec | None]:
    """Load a scenario JSON file, with an optional ``sweep`` object."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a JSON object")
    sweep_data = data.pop("sweep", None)
    cfg = scenario_from_dict(data)
    if sweep_data is None:
        return cfg, None
    unknown = set(sweep_data) - {"axis", "values", "benchmarks"}
    if unknown:
        raise ConfigError(f"unknown keys in 'sweep': {sorted(unknown)}")
    spec = SweepSpec(
        axis=str(sweep_data["axis"]),
        values=tuple(float(v) for v in sweep_data["values"]),
        benchmarks=tuple(str(b) for b in sweep_data["benchmarks"]),
    )
    return cfg, spec


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discosim",
        description="MU-MISO downlink simulator under disco-IRS fully-passive jamming",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark sweep and write CSV results")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario JSON file (with a 'sweep' object)")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario preset")
    run.add_argument(
        "--out",
        default=None,
        help=f"output directory (default: ${OUT_DIR_ENV} or current directory)",
    )
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--trials", type=int, default=None, help="override the trial count")
    run.add_argument(
        "--trace", action="store_true", help="also write a per-trial trace CSV"
    )

    sub.add_parser(
        "plot",
        help="render a results CSV (requires the separate discoplot package)",
        add_help=False,
    )
    return parser


def _run_command(args) -> int:
    if args.preset is not None:
        cfg, spec = PRESETS[args.preset]()
        name = args.preset
    else:
        cfg, spec = load_config_file(args.config)
        if spec is None:
            print("error: config file has no 'sweep' object", file=sys.stderr)
            return 2
        name = os.path.splitext(os.path.basename(args.config))[0]

    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if args.trials is not None:
        cfg = dataclasses.replace(cfg, n_trials=args.trials)

    out_dir = args.out or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}_rates.csv")

    trace_fh = None
    trace_sink = None
    if args.trace:
        trace_path = os.path.join(out_dir, f"{name}_trace.csv")
        trace_fh = open(trace_path, "w", newline="\n")
        trace_fh.write("axis_value,benchmark,trial,record,user,index,value\n")

        def trace_sink(axis_value, bench_name, trial, res):
            for u, rate in enumerate(res.per_lu_rate):
                trace_fh.write(
                    f"{_fmt(axis_value)},{bench_name},{trial},lu_rate,{u},,{_fmt(rate)}\n"
                )
            for s, u, p, d in res.feedback_trace or ():
                trace_fh.write(
                    f"{_fmt(axis_value)},{bench_name},{trial},feedback_power,{u},{s},{_fmt(p)}\n"
                )
                trace_fh.write(
                    f"{_fmt(axis_value)},{bench_name},{trial},delta_hat,{u},{s},{_fmt(d)}\n"
                )

    failures: list[str] = []
    rows: list[SweepRow] = []
    t0 = time.monotonic()
    try:
        for v in spec.values:
            try:
                cfg_v = apply_axis(cfg, spec.axis, v)
            except ConfigError as exc:
                failures.append(f"grid point {spec.axis}={v}: {exc}")
                continue
            for bench_name in spec.benchmarks:
                sink = None
                if trace_sink is not None:
                    sink = lambda t, res, _v=v, _n=bench_name: trace_sink(_v, _n, t, res)
                try:
                    summary = sim.ergodic_rates(cfg_v, sim.benchmark(bench_name), trace_sink=sink)
                except Exception as exc:
                    failures.append(
                        f"grid point {spec.axis}={v}, benchmark '{bench_name}': {exc}"
                    )
                    continue
                rows.append(
                    SweepRow(
                        axis_value=float(v),
                        benchmark=bench_name,
                        mean_rate=summary.mean_rate,
                        ci95=summary.ci95_halfwidth,
                        n_trials=summary.n_trials,
                        seed=cfg.master_seed,
                    )
                )
                print(
                    f"{spec.axis}={v:g} {bench_name}: "
                    f"{summary.mean_rate:.4f} +/- {summary.ci95_halfwidth:.4f} bit/s/Hz",
                    flush=True,
                )
    finally:
        if trace_fh is not None:
            trace_fh.close()

    emit_csv(SweepResult(axis=spec.axis, rows=tuple(rows)), csv_path)
    print(f"wrote {csv_path} ({len(rows)} rows, {time.monotonic() - t0:.1f} s)")
    for f in failures:
        print(f"FAILED: {f}", file=sys.stderr)
    return 1 if failures else 0


def _plot_command(argv) -> int:
    try:
        from discoplot.cli import main as plot_main
    except ImportError:
        print(
            "error: the plotting component is not installed; "
            "install the 'discoplot' package or use its CLI directly",
            file=sys.stderr,
        )
        return 2
    return plot_main(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    # the plot subcommand forwards its arguments verbatim to the optional
    # plotting package, so it is dispatched before argparse sees them
    if argv[:1] == ["plot"]:
        return _plot_command(argv[1:])
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _run_command(args)
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
