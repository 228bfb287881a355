"""Command line entry point: ``hidden-gda run|validate|list-kinds``."""

import argparse
import sys
import time

from .config import KIND_HELP, KINDS, ConfigError, load_config
from .experiments import NumericFailure, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _u64(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="hidden-gda",
                                     description="Gradient-descent-ascent experiments on hidden bilinear games.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (overrides the config's out)")
    run.add_argument("--seed", type=_u64, help="PRNG seed (overrides the config's seed)")
    run.add_argument("--quiet", action="store_true", help="print nothing on success")

    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config")
    val.add_argument("--quiet", action="store_true")

    sub.add_parser("list-kinds", help="list the experiment kinds")
    return parser


def _print_diagnostics(path, err):
    for d in err.diagnostics:
        print(f"{path}: {d}", file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.command == "list-kinds":
        for kind in KINDS:
            print(f"{kind:18s} {KIND_HELP[kind]}")
        return EXIT_OK

    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        _print_diagnostics(args.config, err)
        return EXIT_CONFIG

    if args.command == "validate":
        if not args.quiet:
            print(f"{args.config}: ok ({cfg.kind})")
        return EXIT_OK

    if args.seed is not None:
        cfg.seed = args.seed
    out_dir = args.out or cfg.out
    start = time.perf_counter()
    try:
        result = run_experiment(cfg, out_dir)
    except NumericFailure as exc:
        print(f"numeric failure: {exc}; partial artifacts in {exc.result.out_dir}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # configuration that parsed but cannot be realised (e.g. infeasible spurious margins)
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        print(f"{cfg.kind}: {result.status} in {time.perf_counter() - start:.1f} s")
        for path in result.files:
            print(f"  {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
