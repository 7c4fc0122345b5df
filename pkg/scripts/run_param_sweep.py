#!/usr/bin/env python3
"""Filter-parameter sweeps: the 18-configuration ranking and the particle-count sweep.

Round 1 ranks (w_pct, r, resample strategy) combinations; round 2 varies M
for the best round-1 configuration. Both use the fixed nine-agent rational
roster.

Example:
    python scripts/run_param_sweep.py --round 1 --seeds 10 --workers 2 --out-dir results/sweep
"""

from __future__ import annotations

import argparse
from pathlib import Path

from skillest.experiment import SweepSpec, parameter_sweep, write_sweep_csv


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--round", type=int, choices=(1, 2), default=1)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--m", type=int, default=1000, help="particle count for round 1")
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results/sweep")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.round == 1:
        spec = SweepSpec(
            w_pct_values=(0.002, 0.005, 0.020),
            r_values=(0.75, 0.90, 0.95),
            strategies=("neff_threshold", "always"),
            m_values=(args.m,),
            n_seeds=args.seeds,
            n_observations=args.n,
            seed=args.seed,
            workers=args.workers,
        )
        name = "sweep_round1.csv"
    else:
        spec = SweepSpec(
            w_pct_values=(0.005,),
            r_values=(0.90,),
            strategies=("neff_threshold",),
            m_values=(50, 100, 500, 1000, 1500, 2000),
            n_seeds=args.seeds,
            n_observations=args.n,
            seed=args.seed,
            workers=args.workers,
        )
        name = "sweep_round2.csv"

    table = parameter_sweep(spec)
    write_sweep_csv(out / name, table)
    print(f"{'w_pct':>6} {'r':>5} {'strategy':>15} {'M':>5} {'mean JD':>9} {'runs':>5}")
    for row in table:
        print(
            f"{row['w_pct']:>6} {row['r']:>5} {row['strategy']:>15} "
            f"{row['m']:>5} {row['mean_final_jd']:>9.4f} {row['n_runs']:>5}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
