"""Command-line entry point: ``qperc <experiment> [--config F] [--seed S] [--out D]``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import CapExceededError, ConfigError, ConvergenceError
from .experiments import EXPERIMENTS, load_config, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="set a configuration entry; dotted keys reach nested entries")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qperc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        if name == "trees":
            trees = sub.add_parser("trees", help="unlabeled tree catalog")
            tsub = trees.add_subparsers(dest="action", required=True)
            _add_common(tsub.add_parser("enumerate", help="enumerate trees on k vertices"))
        else:
            _add_common(sub.add_parser(name, help=f"run the {name} experiment"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.command, args.config, args.override, args.seed, args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_experiment(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, CapExceededError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (KeyError, TypeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    path = report.write(args.out)
    print(f"{cfg.experiment}: wrote {path} ({len(report.rows)} rows, "
          f"{report.wall_clock:.1f} s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
