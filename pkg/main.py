"""
Command-line entry point for the verification toolkit.

Usage:
    python main.py <suite> [--config PATH] [--seed N] [--samples N]
        [--tol KEY=VAL ...] [--format json|csv] [--out PATH] [--refit]
        [--no-negative-controls] [--log-level LEVEL]
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from app import VerificationOrchestrator
from core.config import FORMATS, SUITES, get_settings, load_suite_config, with_uniform_samples
from core.errors import EXIT_USAGE, UsageError

logger = logging.getLogger(__name__)

EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _tolerance(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise UsageError(f"--tol expects KEY=VAL, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError as exc:
        raise UsageError(f"--tol {key}: {value!r} is not a number") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="verify", description="Numerical verification of G2 and special Lagrangian geometry.")
    parser.add_argument("suite", choices=SUITES)
    parser.add_argument("--config", type=Path)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int, help="use this sample count for every check")
    parser.add_argument("--tol", action="append", default=[], metavar="KEY=VAL")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--out", type=Path)
    parser.add_argument("--refit", action="store_true", help="refit normalization constants")
    parser.add_argument("--no-negative-controls", action="store_true")
    parser.add_argument("--log-level")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=(args.log_level or get_settings().log_level).upper(),
            format="%(name)s:%(levelname)s:%(message)s",
        )
        overrides = {
            "suite": args.suite,
            "seed": args.seed,
            "format": args.format,
            "output": str(args.out) if args.out else None,
            "tolerances": dict(_tolerance(item) for item in args.tol),
            "refit": True if args.refit else None,
            "negative_controls": False if args.no_negative_controls else None,
        }
        config = load_suite_config(args.config, overrides)
        if args.samples is not None:
            if args.samples < 1:
                raise UsageError("--samples must be at least 1")
            config = with_uniform_samples(config, args.samples)
    except UsageError as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return EXIT_USAGE

    orchestrator = VerificationOrchestrator()
    report = orchestrator.run_suite(config)
    try:
        path = orchestrator.write_report(report, config)
    except OSError as exc:
        logger.error("could not write report: %s", exc)
        return EXIT_IO
    summary = report.summary
    print(f"{config.suite}: {summary['PASS']} pass, {summary['XFAIL']} xfail, {summary['FAIL']} fail, {summary['ERROR']} error -> {path}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
