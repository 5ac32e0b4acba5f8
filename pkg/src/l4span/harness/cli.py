"""Command-line interface.

Subcommands: run, validate, sweep, report, export-scenario.  Exit codes:
0 on success, 1 on configuration errors, 2 when `report` finds a failing
acceptance criterion.
"""

from __future__ import annotations

import argparse
import ast
import copy
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .metrics import write_run
from .scenario import BUILTIN_SCENARIOS, ConfigError, resolve_scenario, save_scenario


def _cmd_run(args) -> int:
    scn = resolve_scenario(args.scenario)
    if args.seed is not None:
        scn.seed = args.seed
    from ..ransim.sim import run as sim_run

    result = sim_run(scn)
    write_run(result, args.out, csv=args.csv)
    print((Path(args.out) / "summary.txt").read_text(), end="")
    return 0


def _cmd_validate(args) -> int:
    scn = resolve_scenario(args.scenario)
    print(f"ok: scenario {scn.name!r} ({len(scn.ues)} UE(s), horizon {scn.horizon_secs}s)")
    return 0


def _set_path(obj, dotted: str, value) -> None:
    parts = dotted.split(".")
    for part in parts[:-1]:
        if part.isdigit():
            obj = obj[int(part)]
        else:
            if not hasattr(obj, part):
                raise ConfigError(f"unknown parameter path segment {part!r} in {dotted!r}")
            obj = getattr(obj, part)
    leaf = parts[-1]
    if not hasattr(obj, leaf):
        raise ConfigError(f"unknown parameter {leaf!r} in {dotted!r}")
    setattr(obj, leaf, value)


def _sweep_point(job) -> str:
    scn, outdir = job
    from ..ransim.sim import run as sim_run

    result = sim_run(scn)
    write_run(result, outdir)
    return str(outdir)


def _cmd_sweep(args) -> int:
    base = resolve_scenario(args.scenario)
    axes = []
    for spec in args.param or []:
        if "=" not in spec:
            raise ConfigError(f"--param needs path=v1,v2 (got {spec!r})")
        path, _, values = spec.partition("=")
        parsed = [ast.literal_eval(v) for v in values.split(",")]
        axes.append((path, parsed))
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [base.seed]

    points = [([], base.seed)]
    for path, values in axes:
        points = [(assign + [(path, v)], seed) for assign, seed in points for v in values]
    points = [(assign, seed) for assign, _ in points for seed in seeds]

    jobs = []
    out_root = Path(args.out)
    for assign, seed in points:
        scn = copy.deepcopy(base)
        label_parts = []
        for path, value in assign:
            _set_path(scn, path, value)
            label_parts.append(f"{path.split('.')[-1]}={value}")
        scn.seed = seed
        label_parts.append(f"seed={seed}")
        scn.validate()
        jobs.append((scn, out_root / "_".join(label_parts)))

    workers = int(os.environ.get("L4SPAN_WORKERS", "0")) or (os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for done in pool.map(_sweep_point, jobs):
                print(f"done: {done}")
    else:
        for job in jobs:
            print(f"done: {_sweep_point(job)}")
    return 0


def _cmd_report(args) -> int:
    from .acceptance import AcceptanceRunner, render_table

    runner = AcceptanceRunner(save_dir=args.dir, verbose=True)
    results = runner.run_all()
    table = render_table(results)
    print(table)
    if args.dir:
        Path(args.dir).mkdir(parents=True, exist_ok=True)
        (Path(args.dir) / "acceptance.txt").write_text(table + "\n")
    return 0 if all(r.passed for r in results) else 2


def _cmd_export(args) -> int:
    scn = resolve_scenario(args.scenario)
    save_scenario(scn, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="l4span",
        description="RAN queue-prediction / ECN-marking simulator",
        epilog="bundled scenarios: " + ", ".join(sorted(BUILTIN_SCENARIOS)),
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run a scenario and write metric streams")
    r.add_argument("scenario", help="scenario file or bundled scenario name")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    r.add_argument("--csv", action="store_true", help="also write CSV exports")
    r.set_defaults(fn=_cmd_run)

    v = sub.add_parser("validate", help="validate a scenario file")
    v.add_argument("scenario")
    v.set_defaults(fn=_cmd_validate)

    s = sub.add_parser("sweep", help="run a parameter/seed sweep")
    s.add_argument("scenario")
    s.add_argument("--param", action="append", help="dotted path=v1,v2 (repeatable)")
    s.add_argument("--seeds", help="comma-separated seeds")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_sweep)

    rep = sub.add_parser("report", help="run the acceptance suite and print the criteria table")
    rep.add_argument("dir", nargs="?", default=None, help="directory for run outputs and the table")
    rep.set_defaults(fn=_cmd_report)

    e = sub.add_parser("export-scenario", help="write a bundled scenario to a file")
    e.add_argument("scenario")
    e.add_argument("--out", required=True)
    e.set_defaults(fn=_cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
