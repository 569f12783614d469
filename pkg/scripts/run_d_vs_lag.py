#!/usr/bin/env python3
"""Depth versus lag sweep: where does a smaller d start beating a larger one?

For each load, sweeps the snapshot lag and reports the mean average depth per
(d, lag) cell plus the interpolated crossover lags.  This is the data behind
the d-versus-lag curves; feed the CSV to any plotting tool.
"""

import argparse
import json
import os

from balloc.core import SimConfig
from balloc.experiments import ExperimentSpec, save_experiment, sweep_d_vs_lag


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=str, default="0.75,0.95")
    ap.add_argument("--ds", type=str, default="2,3,4")
    ap.add_argument("--lags", type=str, default="0,2000,4000,10000,20000")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--replicates", type=int, default=30)
    ap.add_argument("--reduced", action="store_true")
    ap.add_argument("--out", default="results/d_vs_lag")
    args = ap.parse_args()

    lambdas = [float(x) for x in args.lambdas.split(",")]
    ds = [int(x) for x in args.ds.split(",")]
    lags = [int(x) for x in args.lags.split(",")]

    spec = ExperimentSpec(
        base=SimConfig(priority_mix=(1.0,), seed=args.seed),
        replicates=args.replicates,
        reduced_mode=args.reduced,
        name="d_vs_lag",
    )
    rows, crossovers = sweep_d_vs_lag(lambdas, ds, lags, spec)
    csv_path, json_path = save_experiment(spec, rows, args.out)
    with open(os.path.join(args.out, "crossovers.json"), "w") as fh:
        json.dump(crossovers, fh, indent=2)

    for lam in lambdas:
        print(f"lambda={lam}")
        for lag in lags:
            cells = {r.coords["d"]: r.mean_avg_depth for r in rows
                     if r.coords["lambda"] == lam and r.coords["lag"] == lag}
            line = "  ".join(f"d={d}: {cells[d]:6.2f}" for d in ds)
            print(f"  lag {lag:>6}: {line}")
    for c in crossovers:
        if c["crossover_lag"] is not None:
            print(
                f"crossover at lambda={c['lambda']}: d={c['d_low']} beats "
                f"d={c['d_high']} from lag ~{c['crossover_lag']:.0f}"
            )
    print(f"wrote {csv_path}, {json_path}, crossovers.json")


if __name__ == "__main__":
    main()
