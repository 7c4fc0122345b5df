#!/usr/bin/env python3
"""Compare MCSE and JEEDS on stationary agents with random skills.

Runs both estimators on rational/softmax agents under common random
numbers, splits results by symmetry class, and writes per-run records,
aggregate JD curves, and an SVG plot.

Example:
    python scripts/run_static_comparison.py --seeds 30 --workers 2 --out-dir results/static
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from skillest.experiment import (
    EstimatorSpec,
    ExperimentConfig,
    build_agent_spec,
    classify_symmetry,
    draw_skill_classified,
    mean_jd_curves,
    run_experiment,
    write_records_csv,
)
from skillest.mcse import FilterConfig
from skillest.plots import plot_jd_curves
from skillest.rng import derive_seed, substream


def one_run(args):
    seed, agent_kind, symmetry, n_obs, m = args
    rng = substream(seed, "script-skill")
    skill = draw_skill_classified(rng, symmetry)
    spec = build_agent_spec(agent_kind, rng, n_obs, skill=skill)
    config = ExperimentConfig(
        seed=seed,
        agents=((f"{agent_kind}-{seed}", spec),),
        estimators=(
            EstimatorSpec("mcse", "mcse", filter_config=FilterConfig(n_particles=m)),
            EstimatorSpec("jeeds", "jeeds"),
        ),
        n_observations=n_obs,
    )
    return run_experiment(config)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=30)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--m", type=int, default=1000)
    ap.add_argument("--symmetry", choices=("asymmetric", "symmetric"), default="asymmetric")
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results/static")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for k in range(args.seeds):
        kind = "rational" if k % 2 == 0 else "softmax"
        tasks.append((derive_seed(args.seed, "static", k), kind, args.symmetry, args.n, args.m))

    records = []
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            for recs in pool.map(one_run, tasks, chunksize=1):
                records.extend(recs)
    else:
        for t in tasks:
            records.extend(one_run(t))

    write_records_csv(out / f"records_{args.symmetry}.csv", records)
    curves = mean_jd_curves(records)
    plot_jd_curves(curves, out / f"jd_{args.symmetry}.svg")
    for est_id, (_, means) in sorted(curves.items()):
        print(f"{args.symmetry} {est_id}: final mean JD = {means[-1]:.3f} over {args.seeds} runs")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
