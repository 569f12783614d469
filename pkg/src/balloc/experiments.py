"""Multi-run orchestration: axis grids, replicate aggregation, and comparisons.

A spec is a base configuration plus axes to sweep; every cell of the cross
product is simulated ``replicates`` times, replicate r on random stream
(seed, r).  The per-cell statistic follows the mean-of-per-run convention:
each run is first reduced to the mean over its own measurements (average of
averages, average of maxima), then runs are averaged.  Cells and replicates
run in parallel on a thread pool (the hot loop releases the GIL); results are
keyed by index, so aggregation order and output bytes are deterministic.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import TailDistribution
from .core import MAX_PRIORITY_LEVELS, SimConfig
from .engine import RunResult, run

WORKERS_ENV = "BAL_ALLOC_WORKERS"

REDUCED_TOTAL_JUMPS = 2_000_000
REDUCED_REPLICATES = 5

# Axes that may be swept, in canonical column order.
SWEEPABLE = ("lambda", "d", "burst_count", "strategy", "lag", "fuzz", "priority_mix")

_AXIS_ATTR = {"lambda": "lam"}


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentSpec:
    """Base configuration plus the axes of a sweep."""

    base: SimConfig
    axes: dict = field(default_factory=dict)
    replicates: int = 30
    reduced_mode: bool = False
    name: str = "experiment"

    def validate(self) -> None:
        for axis in self.axes:
            if axis not in SWEEPABLE:
                raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEPABLE}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    def effective(self) -> tuple[SimConfig, int]:
        """Base config and replicate count after applying reduced mode."""
        if not self.reduced_mode:
            return self.base, self.replicates
        return (
            replace(self.base, total_jumps=REDUCED_TOTAL_JUMPS),
            min(self.replicates, REDUCED_REPLICATES),
        )

    def cells(self) -> list[dict]:
        """Coordinates of every cell in a stable order."""
        self.validate()
        names = [a for a in SWEEPABLE if a in self.axes]
        if not names:
            return [{}]
        combos = itertools.product(*(self.axes[a] for a in names))
        return [dict(zip(names, combo)) for combo in combos]

    def config_for(self, coords: dict) -> SimConfig:
        base, _ = self.effective()
        overrides = {_AXIS_ATTR.get(k, k): v for k, v in coords.items()}
        cfg = base.with_overrides(**overrides)
        cfg.validate()
        return cfg

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "base": self.base.to_json_dict(),
            "axes": self.axes,
            "replicates": self.replicates,
            "reduced_mode": self.reduced_mode,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ExperimentSpec":
        spec = cls(
            base=SimConfig.from_json_dict(doc["base"]),
            axes=doc.get("axes", {}),
            replicates=doc.get("replicates", 30),
            reduced_mode=doc.get("reduced_mode", False),
            name=doc.get("name", "experiment"),
        )
        spec.validate()
        return spec


@dataclass
class AggregateRow:
    """Replicate-averaged statistics for one cell of the sweep."""

    coords: dict
    replicates: int
    mean_avg_depth: float
    mean_max_depth: float
    std_avg_depth: float
    mean_avg_depth_by_priority: tuple[float, ...]
    mean_max_depth_by_priority: tuple[float, ...]
    recovered_counts: tuple[int, ...]  # per burst, over replicates
    first_window_counts: tuple[int, ...]
    mean_tail: np.ndarray  # replicate-averaged terminal tail fractions
    per_run_avg: tuple[float, ...]  # per-replicate mean avg depth

    def stat_columns(self) -> dict:
        row = {
            "replicates": self.replicates,
            "mean_avg_depth": self.mean_avg_depth,
            "mean_max_depth": self.mean_max_depth,
            "std_avg_depth": self.std_avg_depth,
        }
        for lvl in range(MAX_PRIORITY_LEVELS):
            row[f"mean_avg_depth_p{lvl}"] = self.mean_avg_depth_by_priority[lvl]
        for lvl in range(MAX_PRIORITY_LEVELS):
            row[f"mean_max_depth_p{lvl}"] = self.mean_max_depth_by_priority[lvl]
        reps = max(1, self.replicates)
        nburst = len(self.recovered_counts)
        row["recovered_frac"] = (
            sum(self.recovered_counts) / (reps * nburst) if nburst else ""
        )
        row["first_window_frac"] = (
            sum(self.first_window_counts) / (reps * nburst) if nburst else ""
        )
        return row


def _aggregate(coords: dict, results: list[RunResult]) -> AggregateRow:
    per_run_avg = [r.mean_avg_depth() for r in results]
    per_run_max = [r.mean_max_depth() for r in results]
    prio_avg = np.mean(
        [[np.mean([m.avg_depth_by_priority[lvl] for m in r.measurements]) for lvl in range(3)]
         for r in results],
        axis=0,
    )
    prio_max = np.mean(
        [[np.mean([m.max_depth_by_priority[lvl] for m in r.measurements]) for lvl in range(3)]
         for r in results],
        axis=0,
    )
    nburst = len(results[0].recovery)
    recovered = tuple(
        sum(1 for r in results if r.recovery[w].recovered) for w in range(nburst)
    )
    first_window = tuple(
        sum(1 for r in results if r.recovery[w].in_first_window) for w in range(nburst)
    )
    # Average the terminal tail fractions, padded to the deepest replicate.
    tails = [r.measurements[-1].tail_histogram / r.config.n for r in results]
    width = max(len(t) for t in tails)
    mean_tail = np.zeros(width)
    for t in tails:
        mean_tail[: len(t)] += t
    mean_tail /= len(tails)
    return AggregateRow(
        coords=dict(coords),
        replicates=len(results),
        mean_avg_depth=float(np.mean(per_run_avg)),
        mean_max_depth=float(np.mean(per_run_max)),
        std_avg_depth=float(np.std(per_run_avg, ddof=1)) if len(results) > 1 else 0.0,
        mean_avg_depth_by_priority=tuple(prio_avg),
        mean_max_depth_by_priority=tuple(prio_max),
        recovered_counts=recovered,
        first_window_counts=first_window,
        mean_tail=mean_tail,
        per_run_avg=tuple(per_run_avg),
    )


def run_experiment(spec: ExperimentSpec, keep_results: bool = False):
    """Simulate every (cell, replicate) pair and aggregate per cell.

    Returns the list of :class:`AggregateRow`; with ``keep_results`` also the
    raw ``RunResult`` lists, parallel to the rows.
    """
    spec.validate()
    cells = spec.cells()
    _, replicates = spec.effective()
    tasks = [(ci, rep) for ci in range(len(cells)) for rep in range(replicates)]
    configs = [spec.config_for(c) for c in cells]

    def _one(task):
        ci, rep = task
        return run(configs[ci], run_index=rep)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        flat = list(pool.map(_one, tasks))
    by_cell = [
        [flat[ci * replicates + rep] for rep in range(replicates)]
        for ci in range(len(cells))
    ]
    rows = [_aggregate(cells[ci], by_cell[ci]) for ci in range(len(cells))]
    if keep_results:
        return rows, by_cell
    return rows


def sweep_d_vs_lag(lambdas, ds, lags, spec: ExperimentSpec):
    """Grid of mean average depth over (lambda, d, lag), plus crossover lags.

    A crossover for (d_low, d_high) is the smallest lag at which the smaller
    probe count already wins; between sampled lags the crossing point is
    linearly interpolated.
    """
    interval = spec.base.snapshot_interval
    for lag in lags:
        if lag % interval != 0:
            raise ValueError(f"lag {lag} is not a multiple of snapshot_interval {interval}")
    grid_spec = replace(
        spec, axes={"lambda": list(lambdas), "d": list(ds), "lag": list(lags)}
    )
    rows = run_experiment(grid_spec)
    depth = {
        (r.coords["lambda"], r.coords["d"], r.coords["lag"]): r.mean_avg_depth
        for r in rows
    }
    crossovers = []
    lags = sorted(lags)
    for lam in lambdas:
        for d_low, d_high in itertools.combinations(sorted(ds), 2):
            gap = [depth[(lam, d_high, lag)] - depth[(lam, d_low, lag)] for lag in lags]
            cross = None
            for i, g in enumerate(gap):
                if g >= 0:  # lower d is at least as good here
                    if i == 0:
                        cross = float(lags[0])
                    else:
                        g0, g1 = gap[i - 1], g
                        frac = -g0 / (g1 - g0) if g1 != g0 else 1.0
                        cross = lags[i - 1] + frac * (lags[i] - lags[i - 1])
                    break
            crossovers.append(
                {"lambda": lam, "d_low": d_low, "d_high": d_high, "crossover_lag": cross}
            )
    return rows, crossovers


def compare_to_theory(rows, tails) -> list[dict]:
    """Relative error of simulated depths against analytic expectations.

    Rows and tails are matched on (lambda, d, fuzz[, priority]); a row without
    a matching tail is an error.  Also reports the sup-distance between the
    replicate-averaged empirical tail and the analytic ``s_i`` sequence for
    total-depth comparisons.
    """
    def key_of_tail(t: TailDistribution):
        p = t.params
        return (round(p["lambda"], 9), p["d"], p.get("b", 0) or 0, p.get("priority"))

    index = {key_of_tail(t): t for t in tails}
    report = []
    for row in rows:
        lam = row.coords.get("lambda", None)
        d = row.coords.get("d", None)
        b = row.coords.get("fuzz", 0) or 0
        priority = row.coords.get("priority")
        key = (round(lam, 9), d, b, priority)
        if key not in index:
            raise ValueError(f"no analytic tail for cell {row.coords}")
        tail = index[key]
        if priority is None:
            simulated = row.mean_avg_depth
            width = max(len(row.mean_tail), len(tail.s))
            emp = np.zeros(width)
            emp[: len(row.mean_tail)] = row.mean_tail
            ana = np.zeros(width)
            ana[: len(tail.s)] = tail.s
            sup = float(np.abs(emp - ana).max())
        else:
            simulated = row.mean_avg_depth_by_priority[priority]
            sup = None
        expected = tail.expected_depth
        if expected == 0:
            rel = 0.0 if simulated == 0 else float("inf")
        else:
            rel = abs(simulated - expected) / expected
        report.append(
            {
                "coords": dict(row.coords),
                "simulated": simulated,
                "analytic": expected,
                "rel_error": rel,
                "tail_sup_distance": sup,
            }
        )
    return report


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    if isinstance(value, tuple):
        return "|".join(str(v) for v in value)
    return str(value)


def rows_to_csv(rows: list[AggregateRow], path) -> None:
    """One CSV row per cell: coordinate columns then the fixed stat columns."""
    coord_names = [a for a in SWEEPABLE if rows and a in rows[0].coords]
    stat_names = list(rows[0].stat_columns().keys()) if rows else []
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(coord_names + stat_names)
        for row in rows:
            stats = row.stat_columns()
            writer.writerow(
                [_fmt(row.coords[c]) for c in coord_names]
                + [_fmt(stats[s]) for s in stat_names]
            )


def save_experiment(spec: ExperimentSpec, rows: list[AggregateRow], out_dir) -> tuple[str, str]:
    """Write <name>.results.csv and <name>.summary.json under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{spec.name}.results.csv")
    json_path = os.path.join(out_dir, f"{spec.name}.summary.json")
    rows_to_csv(rows, csv_path)
    summary = {
        "spec": spec.to_json_dict(),
        "cells": [
            {"coords": r.coords, **r.stat_columns(), "per_run_avg": list(r.per_run_avg)}
            for r in rows
        ],
    }
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2)
    return csv_path, json_path
