"""
nslfa command-line entry point.

Commands:
- check-q   structural identifiability of a design matrix
- fit       NSLFA fit of a data file under a design file
- simulate  replication harness for a registered scenario
- oil       oil-flow embedding comparison

Exit codes: 0 success, 1 input or runtime error, 2 non-identifiable design.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from config import VERSION, config
from executor.commands import EXIT_ERROR, cmd_check_q, cmd_fit, cmd_oil, cmd_simulate
from logging_setup import configure_logging
from model.errors import InputError, NSLFAError
from storage.artifacts import load_settings

logger = logging.getLogger(__name__)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from exc


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nslfa", description="Nonlinear structured latent factor analysis")
    parser.add_argument("--version", action="version", version=f"nslfa {VERSION}")
    parser.add_argument("--config", help="settings file (.toml or .json)")
    parser.add_argument("--log-level", help="override NSLFA_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check-q", help="structural identifiability of a design matrix")
    check.add_argument("design", help="0/1 design CSV, one row per item")

    fit = sub.add_parser("fit", help="fit NSLFA to a data file")
    fit.add_argument("data", help="N×J data CSV")
    fit.add_argument("design", help="J×K design CSV")
    fit.add_argument("--method", choices=["joint-map", "iterative"])
    fit.add_argument("--k", type=int, dest="K")
    fit.add_argument("--x-prior", choices=["normal", "uniform"])
    fit.add_argument("--seed", type=int)
    fit.add_argument("--links", type=int, metavar="G", help="write link curves on a G-point grid")
    fit.add_argument("--out")

    sim = sub.add_parser("simulate", help="replication harness for a scenario")
    sim.add_argument("scenario")
    sim.add_argument("--J", type=_int_list, dest="j_values")
    reps = sim.add_mutually_exclusive_group()
    reps.add_argument("--reps", type=int)
    reps.add_argument("--full", action="store_true", help="the full replication count")
    sim.add_argument("--methods", type=_str_list)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out")

    oil = sub.add_parser("oil", help="oil-flow embedding comparison")
    oil.add_argument("data", help="12-feature CSV with a label column")
    oil.add_argument("--subsample", type=int)
    oil.add_argument("--threshold", type=float)
    oil.add_argument("--seed", type=int)
    oil.add_argument("--out")
    return parser


def run(args: argparse.Namespace, argv: Sequence[str]) -> int:
    settings = load_settings(args.config)
    if args.command == "check-q":
        result = cmd_check_q(args.design)
    elif args.command == "fit":
        result = cmd_fit(
            args.data, args.design, out_dir=args.out, settings=settings,
            method=args.method, K=args.K, x_prior=args.x_prior, seed=args.seed,
            links=args.links, argv=argv,
        )
    elif args.command == "simulate":
        if args.reps is not None and args.reps < 0:
            raise InputError(f"--reps must be >= 0, got {args.reps}")
        result = cmd_simulate(
            args.scenario, out_dir=args.out, settings=settings, j_values=args.j_values,
            reps=args.reps, full=args.full, methods=args.methods, seed=args.seed, argv=argv,
        )
    else:
        result = cmd_oil(
            args.data, out_dir=args.out, settings=settings, subsample=args.subsample,
            threshold=args.threshold, seed=args.seed, argv=argv,
        )
    print(result.output.content)
    return result.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors map to 1; exit 2 is reserved for non-identifiable designs
        return EXIT_ERROR if exc.code else 0

    configure_logging(args.log_level or config.runtime.log_level, config.runtime.log_json)
    for warning in config.validate():
        logger.warning(f"[Config] {warning}")

    try:
        return run(args, argv)
    except (NSLFAError, ValidationError, OSError) as exc:
        print(f"nslfa {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
