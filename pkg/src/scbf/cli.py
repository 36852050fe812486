"""Command-line entry point.

Verbs:
  run        execute the configured trajectory and checks into --out
  sweep      one sub-run per value of --axis, aggregated table
  check      analysis-only pass over a stored run directory
  gen-config write the commented reference configuration

Exit status: 0 success, 1 check failure, 2 validation/configuration error.
"""

import argparse
import sys

from .config import ExperimentConfig, write_reference_config
from .domain import ConfigurationError
from .runner import default_workers, execute_run, execute_stored_check, execute_sweep
from .solver import DivergenceError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scbf",
        description="Pseudo-spectral simulator and attractor diagnostics "
                    "for stochastic convective Brinkman-Forchheimer flow",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=default_workers(),
                       help="worker processes (default: $SCBF_WORKERS or 1)")
        p.add_argument("--seed-override", type=int, default=None,
                       help="replace the config's noise seed")

    p_run = sub.add_parser("run", help="execute a configured run")
    common(p_run)

    p_sweep = sub.add_parser("sweep", help="run once per value of one axis")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True,
                         help="parameter path, e.g. noise.dt or params.chi")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated value list")

    p_check = sub.add_parser("check", help="analyze a stored trajectory")
    p_check.add_argument("--traj", required=True,
                         help="run directory with manifest/ledger/fields")
    p_check.add_argument("--out", required=True, help="output directory")

    p_gen = sub.add_parser("gen-config", help="write the reference config")
    p_gen.add_argument("--out", required=True, help="file to write")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_toml(args.config)
    if getattr(args, "seed_override", None) is not None:
        cfg = cfg.with_overrides(seed=args.seed_override)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "gen-config":
            write_reference_config(args.out)
            return 0
        if args.verb == "check":
            return execute_stored_check(args.traj, args.out)
        cfg = _load_config(args)
        if args.verb == "run":
            return execute_run(cfg, args.out)
        if args.verb == "sweep":
            values = [v for v in args.values.split(",") if v]
            return execute_sweep(cfg, args.axis, values, args.out,
                                 workers=args.workers)
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
