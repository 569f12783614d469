#!/usr/bin/env python3
"""Baseline experiment: queue depth by probe count, no bursts/priorities/noise.

Writes the aggregate table plus one time-series CSV per d (plot-ready), and
prints the simulated-vs-analytic comparison.
"""

import argparse
import os

from balloc.analysis import baseline_tail
from balloc.core import SimConfig
from balloc.engine import run
from balloc.experiments import ExperimentSpec, run_experiment, save_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda", dest="lam", type=float, default=0.95)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--replicates", type=int, default=30)
    ap.add_argument("--reduced", action="store_true", help="CI scale: 2M jumps, 5 reps")
    ap.add_argument("--out", default="results/baseline")
    args = ap.parse_args()

    spec = ExperimentSpec(
        base=SimConfig(lam=args.lam, priority_mix=(1.0,), seed=args.seed),
        axes={"d": [1, 2, 3, 4]},
        replicates=args.replicates,
        reduced_mode=args.reduced,
        name="baseline",
    )
    rows = run_experiment(spec)
    csv_path, json_path = save_experiment(spec, rows, args.out)

    print(f"lambda={args.lam}  ({'reduced' if args.reduced else 'full'} scale)")
    print("d  avg_depth  max_depth  analytic")
    for row in rows:
        d = row.coords["d"]
        analytic = baseline_tail(args.lam, d).expected_depth
        print(f"{d}  {row.mean_avg_depth:9.3f}  {row.mean_max_depth:9.2f}  {analytic:8.4f}")

    # one single-run time series per d for plotting
    cfg, _ = spec.effective()
    for d in (1, 2, 3, 4):
        result = run(cfg.with_overrides(d=d))
        result.series_to_csv(os.path.join(args.out, f"baseline_series_d{d}.csv"))
    print(f"wrote {csv_path}, {json_path}, and per-d series CSVs")


if __name__ == "__main__":
    main()
