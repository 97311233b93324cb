"""Command-line front end: run experiments, validate, print rate tables."""

import argparse
import json
import sys

from .acceptance import CRITERIA, run_all
from .errors import CtapSimError
from .experiments import (
    apply_override,
    default_jobs,
    geometry_from_dict,
    load_config,
    rates_table,
    write_csv,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctap-sim",
        description="Adiabatic single-electron transport on a measured quantum-dot rail",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("config", help="experiment JSON file")
    p_run.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="PATH=VALUE",
        help="override a config field, e.g. --set sweep.points=40",
    )
    p_run.add_argument("--jobs", type=int, default=None, help="sweep worker count (default: CTAP_SIM_JOBS or all cores)")
    p_run.add_argument("--out", default=".", help="output directory (default: current)")

    p_val = sub.add_parser("validate", help="run the validation suite")
    p_val.add_argument("--only", default=None, choices=sorted(CRITERIA), help="restrict to one criterion group")

    p_rates = sub.add_parser("rates", help="print the decoherence-rate table for a geometry")
    p_rates.add_argument("--geometry", required=True, help="JSON file with RailGeometry fields")
    p_rates.add_argument("--max-separation", type=int, default=20)
    p_rates.add_argument("--out", default=None, help="also write the table to this CSV path")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    for assignment in args.overrides:
        apply_override(config, assignment)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    from .experiments import run_experiment

    written = run_experiment(config, out_dir=args.out, jobs=jobs)
    for path in written:
        print(path)
    return 0


def _cmd_validate(args) -> int:
    checks, ok = run_all(only=args.only)
    width = max(len(c.name) for c in checks)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {c.group:10s} {c.name:{width}s} measured={c.measured:.6g} expected {c.expected}")
    failed = sum(1 for c in checks if not c.passed)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if ok else 1


def _cmd_rates(args) -> int:
    with open(args.geometry) as fh:
        geo_cfg = json.load(fh)
    g = geometry_from_dict(geo_cfg)
    table = rates_table(g, max_separation=args.max_separation)
    print(",".join(table.columns))
    for row in table.rows:
        print(",".join(format(x, ".6e") if isinstance(x, float) else str(x) for x in row))
    if args.out:
        write_csv(table, args.out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_rates(args)
    except CtapSimError as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
