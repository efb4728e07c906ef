"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 selftest failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import config as cfgmod
from . import experiments as ex
from .results import read_csv, write_csv

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SELFTEST = 4

QUAD_COMMANDS = {
    "quad-fixed": ex.run_quad_fixed,
    "quad-stochastic": ex.run_quad_stochastic,
    "quad-products": ex.run_quad_products,
}


def _parser():
    p = argparse.ArgumentParser(prog="rpreturn",
                                description="Right-point vs discrete-time return experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in (*QUAD_COMMANDS, "servo-sweep", "servo-curves"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="INI file; the [%s] section overrides defaults" % name)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.add_argument("--per-trial", action="store_true", help="also emit one row per trial or run")
        if name in QUAD_COMMANDS:
            sp.add_argument("--trials", type=int)
        else:
            sp.add_argument("--runs", type=int)
            sp.add_argument("--budget", type=float, help="simulated seconds per run")
            sp.add_argument("--alphas", help="comma-separated step sizes")
            sp.add_argument("--delta-mus", help="comma-separated target intervals in seconds")
        if name == "servo-curves":
            sp.add_argument("--sweep", type=Path, help="sweep CSV used to pick the best step size per variant")
    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.add_argument("--seed", type=int, default=0)
    return p


def _build_config(args):
    if args.command in QUAD_COMMANDS:
        base = cfgmod.QUAD_DEFAULTS[args.command]
    else:
        base = cfgmod.ControlExperimentConfig()
    if args.config is not None:
        base = cfgmod.load(args.config, args.command, base)
    overrides = {}
    for flag in ("seed", "trials", "runs", "budget"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = value
    for flag in ("alphas", "delta_mus"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = tuple(float(v) for v in value.split(",") if v.strip())
    try:
        return dataclasses.replace(base, **overrides)
    except TypeError as exc:
        raise cfgmod.ConfigError(str(exc)) from None


def _check_output(path: Path | None):
    if path is None:
        return
    parent = path.resolve().parent
    if not parent.is_dir():
        raise OSError(f"output directory does not exist: {parent}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selftest":
        from .selftest import run_selftest
        return 0 if run_selftest(seed=args.seed) else EXIT_SELFTEST
    try:
        cfg = _build_config(args)
        if args.jobs < 1:
            raise cfgmod.ConfigError("--jobs must be at least 1")
    except (cfgmod.ConfigError, ValueError) as exc:
        print(f"rpreturn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _check_output(args.out)
        alphas = None
        if args.command == "servo-curves" and args.sweep is not None:
            with open(args.sweep) as fh:
                alphas = ex.best_alphas(read_csv(fh), cfg.delta_mus[0])
    except (OSError, ValueError) as exc:
        print(f"rpreturn: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command in QUAD_COMMANDS:
            rows = QUAD_COMMANDS[args.command](cfg, jobs=args.jobs, per_trial=args.per_trial)
        elif args.command == "servo-sweep":
            rows = ex.run_servo_sweep(cfg, jobs=args.jobs, per_trial=args.per_trial)
        else:
            rows = ex.run_servo_curves(cfg, alphas=alphas, jobs=args.jobs)
    except ValueError as exc:
        print(f"rpreturn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.out is None:
            write_csv(rows, sys.stdout)
        else:
            with open(args.out, "w", newline="") as fh:
                write_csv(rows, fh)
    except OSError as exc:
        print(f"rpreturn: I/O error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
