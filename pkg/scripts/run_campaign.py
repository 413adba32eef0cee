"""NLOS success-percentage comparison of exhaustive, position- and APS-assisted training."""

import argparse
import time
from pathlib import Path

from infrasense.campaign import run_campaign
from infrasense.config import campaign_config, load_config
from infrasense.export import emit_results


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    cfg = campaign_config(trials=args.trials, seed=args.seed)
    if args.config:
        cfg = load_config(args.config, cfg)
    start = time.perf_counter()
    result = run_campaign(cfg, args.threads)
    elapsed = time.perf_counter() - start
    for s in result.summaries:
        print(f"{s.strategy:>14}  {s.success_pct:6.2f}%  [{s.success_ci_low:6.2f}, "
              f"{s.success_ci_high:6.2f}]  {s.mean_pairs:7.1f} symbols  gap {s.mean_snr_gap_db:.2f} dB")
    print(f"{cfg.trials} trials in {elapsed:.1f} s")
    for path in emit_results(result, args.format, args.out / f"campaign.{args.format}"):
        print("wrote", path)


if __name__ == "__main__":
    main()
