"""Command-line runner for the bundled scenarios.

Exit codes: 0 success, 1 configuration error, 2 runtime or numeric error.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .netmodel import ConfigurationError


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors -> exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="adacomp",
        description=(
            "Seeded sweeps for adaptive base-station coordination: COS time "
            "fractions, throughput vs overhead delay, and SIR CCDF bounds."
        ),
    )
    p.add_argument("--config", metavar="PATH", help="JSON config file")
    p.add_argument(
        "--scenario", metavar="NAME", choices=experiments.SCENARIOS,
        help=f"one of {', '.join(experiments.SCENARIOS)} (overrides the file)",
    )
    p.add_argument("--seed", type=int, metavar="U64", help="base RNG seed")
    p.add_argument("--trials", type=int, metavar="N", help="trials per grid point")
    p.add_argument("--output", metavar="PATH", help="result file (default <scenario>.<fmt>)")
    p.add_argument("--workers", type=int, metavar="N", help="parallel grid-point jobs")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), help="output format")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG quick-look")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "output": args.output,
        "workers": args.workers,
        "format": args.fmt,
        "figures": False if args.no_figures else None,
    }
    try:
        raw = experiments.resolve_config(args.config, args.scenario, overrides)
    except (ConfigurationError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    diag = experiments.validate_config(raw)
    for w in diag.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not diag.ok:
        for e in diag.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 1
    try:
        spec = experiments.build_spec(raw)
        result = experiments.run(spec)
    except Exception as e:  # runtime/numeric problems all map to exit 2
        print(f"runtime error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {result.output_path} ({len(result.rows)} rows)")
    print(f"manifest: {result.manifest_path}")
    if result.figure_path:
        print(f"figure: {result.figure_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
