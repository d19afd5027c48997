"""Command line entry point: ``rabs-sim coverage|energy|traffic``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ExperimentConfig
from .exceptions import ConfigError, InfeasibleError
from .harness import run_and_write

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rabs-sim", description=__doc__)
    p.add_argument("experiment", choices=["coverage", "energy", "traffic"])
    p.add_argument("--config", help="JSON config file; defaults apply to anything omitted")
    p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    p.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", help="output directory (overrides $RABS_SIM_OUT_DIR and the config)")
    p.add_argument("--workers", type=int, default=1, help="worker processes for trials")
    p.add_argument("--emit-gnuplot", action="store_true", help="also write a gnuplot script")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        cfg = cfg.with_overrides(trials=args.trials, seed=args.seed, out_dir=args.out).validate()
        out = run_and_write(args.experiment, cfg, workers=args.workers, emit_gnuplot=args.emit_gnuplot)
    except InfeasibleError as e:
        print(f"rabs-sim: infeasible model: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConfigError as e:
        print(f"rabs-sim: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {args.experiment} results to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
