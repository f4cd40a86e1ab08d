"""Command-line entry point.

Usage:
    catreverse <scenario> [--config FILE] [--set key=value]... [--full]
               [--seed S] [--out DIR]

Scenarios: diffusion, profile, image, fidelity, verify, resources.  The
environment variable CATREVERSE_THREADS caps kernel parallelism; it never
changes output bytes.
"""
from __future__ import annotations

import argparse
import sys

from .scenarios import SCENARIOS, build_run_config, parse_config_file, run_scenario


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catreverse",
        description="Reverse chaotic diffusion on a simulated gate-level quantum computer.",
    )
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one configuration entry (repeatable)",
    )
    parser.add_argument("--full", action="store_true",
                        help="run at the 26-qubit scale (slow, large memory)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        file_entries = parse_config_file(args.config) if args.config else {}
        overrides: dict[str, str] = {}
        for item in args.overrides:
            if "=" not in item:
                raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            overrides[key.strip()] = value.strip()
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        if args.out is not None:
            overrides["out"] = args.out
        config = build_run_config(args.scenario, file_entries, overrides, full=args.full)
    except (ValueError, OSError) as exc:
        print(f"catreverse: {exc}", file=sys.stderr)
        return 2
    return run_scenario(config)


if __name__ == "__main__":
    raise SystemExit(main())
