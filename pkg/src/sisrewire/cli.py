"""Command line: ``sisrewire {simulate,regions,nmpc,experiment} ...``.

Exit status is 0 on success (an uncontrollable verdict is still success),
2 for configuration errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .config import RunConfig, parse_value
from .equilibria import RegionClass, hopf_curve, region_map, transcritical_u1
from .errors import ConfigError, SisRewireError, UnknownScenario
from .experiments import scenario_names, scenario_run
from .integrator import ControlSchedule, simulate
from .model import ControlInput
from .nmpc import run_nmpc

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("sisrewire")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already exits 2; keep the message format uniform
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="optimizer seed (control.seed)")
    p.add_argument("--plot", action="store_true", help="also write SVG plots")
    p.add_argument("--literal-paper-ss", action="store_true",
                   help="use the single gamma*SI recovery term in the signed-u2 SS equation")
    p.add_argument("--cost-indexing", choices=("shifted", "literal"))
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key, e.g. --set system.tau=0.5 (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sisrewire", description="Pairwise SIS epidemics controlled by link rewiring.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("simulate", "integrate under a constant or file-given control schedule"),
        ("regions", "classify the constant-control (u1, u2) plane and trace the Hopf curve"),
        ("nmpc", "run the receding-horizon controller"),
    ):
        _common(sub.add_parser(name, help=help_))
    ex = sub.add_parser("experiment", help="run a named study")
    ex.add_argument("name", help="one of: " + ", ".join(scenario_names()))
    _common(ex)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        cfg.set(key, parse_value(val))
    if args.seed is not None:
        cfg.set("control.seed", args.seed)
    if args.literal_paper_ss:
        cfg.set("system.literal_ss", True)
    if args.cost_indexing:
        cfg.set("control.cost_indexing", args.cost_indexing)
    return cfg


def _schedule(cfg: RunConfig) -> tuple[ControlSchedule, str]:
    run = cfg.section("run")
    dt = float(run.get("dt", 0.1))
    system = str(run.get("system", "constant"))
    if "schedule" in run:
        path = Path(str(run["schedule"]))
        try:
            header, rows = io.read_csv(path)
        except (OSError, IndexError) as exc:
            raise ConfigError(f"run.schedule: cannot read {path}: {exc}") from None
        try:
            i1, i2 = header.index("u1"), header.index("u2")
            arr = [(float(r[i1]), float(r[i2])) for r in rows]
        except ValueError as exc:
            raise ConfigError(f"run.schedule: {path} needs numeric u1,u2 columns ({exc})") from None
        if not arr:
            raise ConfigError(f"run.schedule: {path} has no rows")
        return ControlSchedule.from_array(dt, arr), system
    u = ControlInput(float(run.get("u1", 0.0)), float(run.get("u2", 0.0)))
    return ControlSchedule.constant(u, dt, float(run.get("T", 10.0))), system


def cmd_simulate(args, cfg: RunConfig) -> int:
    params = cfg.system_params()
    schedule, system = _schedule(cfg)
    traj = simulate(params, schedule, system=system)
    out = Path(args.out)
    io.write_trajectory(out / "trajectory.csv", traj)
    I_T, n_T = traj.final_output
    io.write_json(out / "summary.json", {
        "command": "simulate", "params": params, "system": system, "dt": schedule.dt,
        "steps": len(schedule), "final_I": I_T, "final_n": n_T, "config": cfg.effective(),
    })
    if args.plot:
        from .plot import line_plot

        line_plot(out / "trajectory.svg", traj.times, {"I(t)": {"I": traj.I}, "n(t)": {"n": traj.n}}, "simulate")
    print(f"final I={I_T:.6g} n={n_T:.6g}")
    return EXIT_OK


def cmd_regions(args, cfg: RunConfig) -> int:
    params = cfg.system_params()
    g = cfg.grid()
    cells = region_map(params, cfg.u1_values(), cfg.u2_values())
    out = Path(args.out)
    io.write_csv(out / "regions.csv", ("u1", "u2", "class"), cells)
    curve = []
    if g["hopf_points"] > 0:
        hopf_u1 = np.linspace(g["hopf_u1_min"], g["hopf_u1_max"], g["hopf_points"])
        curve = hopf_curve(params, hopf_u1, (g["hopf_u2_min"], g["hopf_u2_max"]))
    io.write_csv(out / "hopf.csv", ("u1", "u2"), curve)
    u1_star = transcritical_u1(params)
    counts = {c.value: sum(1 for x in cells if x[2] is c) for c in RegionClass}
    io.write_json(out / "summary.json", {
        "command": "regions", "params": params, "grid": g, "transcritical_u1": u1_star,
        "region_counts": counts, "hopf_points": len(curve), "config": cfg.effective(),
    })
    if args.plot:
        from .plot import region_plot

        region_plot(out / "regions.svg", [(a, b, c.value) for a, b, c in cells], "regime map")
    print(f"transcritical u1*={u1_star:.6g}; regions {counts}; hopf points {len(curve)}")
    return EXIT_OK


def cmd_nmpc(args, cfg: RunConfig) -> int:
    params = cfg.system_params()
    ncfg = cfg.nmpc_config()
    res = run_nmpc(params, ncfg)
    out = Path(args.out)
    io.write_trajectory(out / "trajectory.csv", res.trajectory)
    io.write_csv(out / "controls.csv", ("k", "t", "u1", "u2"),
                 [(k, k * ncfg.dt, u.u1, u.u2) for k, u in enumerate(res.applied_controls.steps)])
    io.write_json(out / "summary.json", {
        "command": "nmpc", "params": params, "nmpc": dataclasses.asdict(ncfg), "horizon": ncfg.horizon,
        "seed": ncfg.seed, "controllable": res.controllable, "final_I": res.final_I, "final_n": res.final_n,
        "dev_I": res.dev_I, "dev_n": res.dev_n, "stalled_steps": res.stalled_steps,
        "objective_history": res.objective_history, "config": cfg.effective(),
    })
    if args.plot:
        from .plot import line_plot

        t = res.trajectory
        u = np.vstack([t.controls, t.controls[-1:]])
        line_plot(out / "trajectory.svg", t.times, {
            "I(t)": {"I": t.I}, "n(t)": {"n": t.n}, "u1": {"u1": u[:, 0]}, "u2": {"u2": u[:, 1]},
        }, "nmpc")
    print(f"controllable={res.controllable} final I={res.final_I:.6g} n={res.final_n:.6g}")
    return EXIT_OK


def cmd_experiment(args, cfg: RunConfig) -> int:
    workers = int(cfg.section("run").get("workers", 1))
    summary = scenario_run(args.name, cfg.scenario_overrides(), args.out, workers=workers, plot=args.plot)
    print(f"{summary['scenario']}: wrote {len(summary['files'])} files to {args.out}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "regions": cmd_regions, "nmpc": cmd_nmpc, "experiment": cmd_experiment}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, UnknownScenario) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SisRewireError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, OverflowError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
