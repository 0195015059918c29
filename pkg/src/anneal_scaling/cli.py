"""Command-line entry point.

    anneal-scaling <experiment> [--config cfg.json] [--out DIR]
                   [--workers K] [--accuracy EPS] [--no-cache]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys

from .config import EXPERIMENTS, build_config, load_config_file, validate, with_flag_overrides
from .errors import FitQualityError, IntegrationError, NotApplicableError, SearchError
from .experiments import run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anneal-scaling",
        description="Run one annealing-runtime experiment and write CSV/JSON results.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS, help="experiment to run")
    parser.add_argument("--config", help="JSON config file (flags override it)")
    parser.add_argument("--out", help="output directory (default: results)")
    parser.add_argument("--workers", type=int, help="worker process count (default: 1)")
    parser.add_argument("--accuracy", type=float, help="evolution accuracy override")
    parser.add_argument("--no-cache", action="store_true",
                        help="recompute even if a cached run exists")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = load_config_file(args.config) if args.config else {}
        config = build_config(args.experiment, overrides)
        config = with_flag_overrides(config, args.out, args.workers, args.accuracy)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    violations = validate(config)
    if violations:
        for violation in violations:
            print(f"config error: {violation}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        record, out_path = run_experiment(config, use_cache=not args.no_cache)
    except (IntegrationError, SearchError, NotApplicableError, FitQualityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    print(f"{config.experiment}: wrote {len(record.tables)} table(s) to {out_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
