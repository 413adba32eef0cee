"""Command line entry point.

Exit codes: 0 success, 1 failed validation, 2 bad configuration or an
infeasible scene, 3 file I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .campaign import (DropSamplingError, aps_pair, aps_similarity_study,
                       overhead_rows, overhead_table, run_campaign)
from .config import PRESETS, ConfigError, ExperimentConfig, load_config
from .export import FORMATS, emit_results, write_table
from .scene import InfeasibleDropError
from .sensing import write_aps_csv
from .validate import run_checks

log = logging.getLogger("infrasense")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
OVERHEAD_COLUMNS = ("strategy", "pair_count", "training_time_ms")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML file layered over the preset")
    common.add_argument("--seed", type=_u64, help="campaign seed (unsigned 64-bit)")
    common.add_argument("--trials", type=_positive, help="number of drops")
    common.add_argument("--out", type=Path, help="directory for result files")
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--threads", type=_positive, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="infrasense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("overhead", parents=[common], help="training overhead table (LOS sweep)")
    p.add_argument("--pairs", type=int, nargs="+", metavar="N",
                   help="only convert the given pair counts to training time")
    sub.add_parser("campaign", parents=[common], help="NLOS strategy comparison")
    p = sub.add_parser("aps-demo", parents=[common], help="radar vs comm APS on LOS drops")
    p.add_argument("--drop", type=int, default=0, help="trial whose two APS files are exported")
    sub.add_parser("validate", parents=[common], help="run the invariant self-checks")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    preset = PRESETS.get(args.command, PRESETS["campaign"])()
    cfg = load_config(args.config, preset) if args.config else preset
    changes = {k: getattr(args, k) for k in ("seed", "trials") if getattr(args, k) is not None}
    return cfg.replace(**changes) if changes else cfg


def _print_rows(header: Sequence[str], rows) -> None:
    print("  ".join(f"{h:>16}" for h in header))
    for row in rows:
        print("  ".join(f"{v:>16.6g}" if isinstance(v, float) else f"{v!s:>16}" for v in row))


def cmd_overhead(args, cfg: ExperimentConfig) -> int:
    if args.pairs:
        if min(args.pairs) < 0:
            raise ConfigError("pair counts must be non-negative")
        rows = overhead_rows({str(n): float(n) for n in args.pairs}, cfg.comm.symbol_duration_s)
    else:
        rows, result = overhead_table(cfg, args.threads)
        if args.out:
            emit_results(result, args.format, args.out / f"overhead_sweep.{args.format}")
    _print_rows(OVERHEAD_COLUMNS, [(r.strategy, r.pair_count, r.training_time_ms) for r in rows])
    if args.out:
        write_table(rows, OVERHEAD_COLUMNS, args.out / "overhead.csv")
    return EXIT_OK


def cmd_campaign(args, cfg: ExperimentConfig) -> int:
    result = run_campaign(cfg, args.threads)
    _print_rows(("strategy", "success_pct", "ci_low", "ci_high", "mean_pairs", "mean_time_ms",
                 "mean_snr_gap_db"),
                [(s.strategy, s.success_pct, s.success_ci_low, s.success_ci_high, s.mean_pairs,
                  s.mean_time_ms, s.mean_snr_gap_db) for s in result.summaries])
    if args.out:
        for path in emit_results(result, args.format, args.out / f"campaign.{args.format}"):
            log.info("wrote %s", path)
    return EXIT_OK


def cmd_aps_demo(args, cfg: ExperimentConfig) -> int:
    study = aps_similarity_study(cfg, args.threads)
    offsets = np.array([c.offset_steps for c in study])
    within = float(np.mean(np.abs(offsets) <= 2))
    print(f"drops: {len(study)}")
    print(f"peaks within 2 grid steps: {100 * within:.1f}%")
    print(f"median offset: {float(np.median(offsets)):g} steps (radar minus comm)")
    print(f"median correlation: {float(np.median([c.correlation for c in study])):.4f}")
    if args.out:
        write_table(study, ("trial", "range_m", "offset_steps", "correlation"),
                    args.out / "aps_similarity.csv")
        _, radar, comm = aps_pair(cfg, args.drop)
        write_aps_csv(radar, args.out / f"radar_aps_{args.drop}.csv", normalize=True)
        write_aps_csv(comm, args.out / f"comm_aps_{args.drop}.csv", normalize=True)
    return EXIT_OK


def cmd_validate(args, cfg: ExperimentConfig) -> int:
    checks = run_checks(cfg)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILED


COMMANDS = {"overhead": cmd_overhead, "campaign": cmd_campaign, "aps-demo": cmd_aps_demo,
            "validate": cmd_validate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, InfeasibleDropError, DropSamplingError) as exc:
        print(f"infrasense: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"infrasense: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
