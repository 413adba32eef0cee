"""Training-overhead table: exhaustive vs GNSS- vs RSU-radar-assisted pruning on LOS drops."""

import argparse
from pathlib import Path

import numpy as np

from infrasense.campaign import overhead_table
from infrasense.config import load_config, overhead_config
from infrasense.export import write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    cfg = overhead_config(trials=args.trials)
    if args.config:
        cfg = load_config(args.config, cfg)
    rows, result = overhead_table(cfg, args.threads)
    for r in rows:
        print(f"{r.strategy:>12}  {r.pair_count:9.2f} pairs  {r.training_time_ms:8.4f} ms")

    gnss = np.array([rec.outcomes[1].pairs for rec in result.records])
    radar = np.array([rec.outcomes[2].pairs for rec in result.records])
    print(f"radar/GNSS mean ratio {radar.mean() / gnss.mean():.3f}; "
          f"radar < GNSS on {100 * np.mean(radar < gnss):.1f}% of drops")
    print("wrote", write_table(rows, ("strategy", "pair_count", "training_time_ms"),
                               args.out / "overhead.csv"))


if __name__ == "__main__":
    main()
