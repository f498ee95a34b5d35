"""Command-line front end.

    skl <experiment> [--config cfg.json] [--out dir] [--seed N] [--trials N]

Runs one experiment or verification suite, writes its CSV into the output
directory, and prints a PASS/FAIL line per verified invariant.  Exit
codes: 0 success, 2 configuration error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, SpikedKernelError
from .experiments import (
    EXPERIMENTS,
    config_from_json,
    default_config,
    run_experiment,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skl",
        description="Spiked-kernel experiments and verification suites.",
    )
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--trials", type=int, help="override the trial count")
    return parser


def load_config(args) -> "ExperimentConfig":
    if args.config is not None:
        cfg = config_from_json(Path(args.config).read_text(encoding="utf-8"))
        if cfg.experiment != args.experiment:
            raise ConfigError(
                f"config is for {cfg.experiment!r} but {args.experiment!r} was requested"
            )
    else:
        cfg = default_config(args.experiment)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpikedKernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / f"{cfg.experiment}.csv"
    write_csv(result, csv_path)
    print(f"wrote {len(result.rows)} rows to {csv_path}")
    for check in result.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name} value={check.value:.17g}")
    if result.checks and not result.passed:
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
