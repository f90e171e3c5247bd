"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 golden
check mismatch.  Reports go to ``--output``, else the scenario's
``output.path``, else ``$ADAPTCOMP_OUTPUT_DIR/<name>.<ext>``, else stdout.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .errors import AdaptCompError, ConfigError
from .report import check_theorems, compare, run
from .repro import TARGETS, repro
from .scenario import POLICIES, from_dict, load_scenario

ENV_OUTPUT_DIR = "ADAPTCOMP_OUTPUT_DIR"


def _common(p):
    p.add_argument("--output", "-o", help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--bits", action="store_true", help="report gains in bits instead of nats")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--grid-resolution", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adaptcomp",
        description="Adaptive compressive measurement policies for Gaussian signals.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the scenario's policy")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("repro", help="run a pinned reproduction target with golden checks")
    p.add_argument("name", choices=TARGETS)
    _common(p)

    p = sub.add_parser("compare", help="run several policies on one scenario")
    p.add_argument("config")
    p.add_argument("--policies", required=True,
                   help=f"comma-separated subset of {','.join(POLICIES)}")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)

    p = sub.add_parser("check-theorems", help="evaluate the greedy-optimality conditions")
    p.add_argument("config")
    _common(p)
    return parser


def _load(args):
    cfg = load_scenario(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.grid_resolution is not None:
        overrides["grid_resolution"] = args.grid_resolution
    if overrides:
        cfg = from_dict(dict(cfg.raw, **overrides), source=args.config)
    return cfg


def _destination(args, cfg_path, default_name, fmt):
    if args.output:
        return Path(args.output)
    if cfg_path:
        return Path(cfg_path)
    env = os.environ.get(ENV_OUTPUT_DIR)
    if env:
        return Path(env) / f"{default_name}.{fmt}"
    return None


def render(reports, fmt):
    if fmt == "csv":
        parts = [r.to_csv() for r in reports]
        head, *rest = parts
        # One header for the whole table.
        return head + "".join(p.split("\n", 1)[1] for p in rest)
    if len(reports) == 1:
        return reports[0].to_json()
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"


def write_report(text, dest):
    if dest is None:
        sys.stdout.write(text)
        return
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(text)


def _execute(args):
    if args.command == "repro":
        fmt = args.format or ("csv" if args.name == "vA_alpha_sweep" else "json")
        try:
            reports = [repro(args.name, bits=args.bits, grid_resolution=args.grid_resolution)]
        except AdaptCompError as exc:
            partial = getattr(exc, "report", None)
            if partial is not None:
                write_report(render([partial], fmt), _destination(args, None, args.name, fmt))
            raise
        name, cfg_path = args.name, None
    else:
        cfg = _load(args)
        fmt = args.format or cfg.output_format
        cfg_path, name = cfg.output_path, cfg.name
        if args.command == "run":
            reports = [run(cfg, bits=args.bits)]
        elif args.command == "compare":
            policies = [p.strip() for p in args.policies.split(",") if p.strip()]
            unknown = [p for p in policies if p not in POLICIES]
            if unknown or not policies:
                raise ConfigError(f"--policies: unknown or empty policy list {unknown or policies}")
            reports = compare(cfg, policies, bits=args.bits, jobs=max(1, args.jobs))
        else:
            reports = [check_theorems(cfg, bits=args.bits)]
    write_report(render(reports, fmt), _destination(args, cfg_path, name, fmt))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _execute(args)
    except AdaptCompError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ArithmeticError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
