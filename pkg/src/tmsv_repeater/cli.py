"""Command-line entry point: ``tmsv-repeater <experiment> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 a built-in check failed under ``--check``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .experiments import EXPERIMENTS, ConfigError, configure, render_csv, render_svg, run_experiment
from .linalg import InvalidStateError
from .register import CutoffError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _threads(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tmsv-repeater", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name, exp in EXPERIMENTS.items():
        p = sub.add_parser(name, help=exp.title, description=exp.title)
        p.add_argument("--config", type=Path, help="INI file overriding the defaults")
        p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
        p.add_argument("--out", type=Path, help="CSV destination (default: stdout)")
        p.add_argument("--svg", type=Path, help="also write a line plot here")
        p.add_argument("--threads", type=_threads, default=1, help="worker processes")
        p.add_argument("--check", action="store_true", help="evaluate the built-in checks")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = configure(args.experiment, args.config, args.seed)
        result = run_experiment(cfg, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, CutoffError, InvalidStateError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = render_csv(result, cfg)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8")
    if args.svg is not None:
        args.svg.write_text(render_svg(result, EXPERIMENTS[cfg.name].title), encoding="utf-8")
    for line in result.summary:
        print(line, file=sys.stderr)
    if args.check:
        for c in result.checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}{': ' + c.detail if c.detail else ''}", file=sys.stderr)
        if not result.passed:
            return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
