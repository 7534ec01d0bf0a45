"""Command-line entry point: ``frisopt {run,validate,profile,convergence}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from frisopt.config import ExperimentConfig
from frisopt.errors import ConfigError, InstanceTooLargeError
from frisopt.harness import convergence_rows, dump_support_profile, run_trials, validate_against_oracle

EXIT_OK, EXIT_CONFIG, EXIT_GUARD = 0, 2, 3

log = logging.getLogger("frisopt")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment JSON (defaults mirror the simulation table)")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--trials", type=int, help="number of trials (overrides the config)")
    common.add_argument("--out", help="output path; stdout when omitted")
    common.add_argument("--threads", type=int, default=1, help="worker processes")

    p = argparse.ArgumentParser(prog="frisopt", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="Monte Carlo rates for all schemes, with optional sweep")
    sub.add_parser("validate", parents=[common], help="gain ratios against exhaustive search (small M)")
    prof = sub.add_parser("profile", parents=[common], help="support value versus direction")
    prof.add_argument("--trial", type=int, default=0, help="realization index to profile")
    sub.add_parser("convergence", parents=[common], help="per-iteration |z| and rate of the proposed AO")
    return p


def _load(args) -> ExperimentConfig:
    overrides = {"master_seed": args.seed, "trials": args.trials, "out": args.out}
    if args.config:
        return ExperimentConfig.load(args.config, **overrides)
    return ExperimentConfig.from_dict({}, **overrides)


def _emit(text: str, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command in ("run", "validate"):
            runner = run_trials if args.command == "run" else validate_against_oracle
            result = runner(cfg, threads=args.threads)
            if cfg.out:
                result.write(cfg.out)
                log.info("wrote %s and %s.summary.json", cfg.out, cfg.out)
            else:
                sys.stdout.write(result.csv_text())
            sys.stderr.write(json.dumps(result.summary["points"], indent=1) + "\n")
        elif args.command == "profile":
            _emit(dump_support_profile(cfg, trial=args.trial), cfg.out)
        else:
            _emit(convergence_rows(cfg, threads=args.threads), cfg.out)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except InstanceTooLargeError as exc:
        log.error("oracle guard: %s", exc)
        return EXIT_GUARD
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
