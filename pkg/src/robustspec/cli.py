"""Command-line entry point.

Subcommands mirror the experiment modes: exponent, dominance, simulate,
minimax, full.  Exit codes: 0 success, 2 config error, 3 numerical failure,
4 IO failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, RobustSpecError
from .harness import MODES, parse_config, run_experiment, write_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustspec",
        description="Minimax-robust Gaussian detection experiments",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run a {mode!r} experiment")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=None, help="report output path")
        p.add_argument(
            "--format", choices=("json", "csv"), default="json", help="report format"
        )
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--grid", type=int, default=None, help="override grid size")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 4
    try:
        config = parse_config(text)
        config.mode = args.mode
        if args.seed is not None:
            config.seed = args.seed
        if args.grid is not None:
            if args.grid < 8:
                raise ConfigError(f"grid_size must be >= 8, got {args.grid}")
            config.grid_size = args.grid
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        record = run_experiment(config)
    except RobustSpecError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    out_path = args.out or config.output_path
    try:
        if out_path:
            write_report(record, out_path, args.format)
        else:
            json.dump(record.to_json(), sys.stdout, indent=2)
            print()
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
