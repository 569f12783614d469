"""Discrete-time jump process driving the queue bank.

Each jump is equiprobably an arrival or a departure.  An arrival jump draws a
Poisson number of jobs at the current rate (the ambient rate, or the burst
rate inside a burst window) and despatches them one at a time through the
scheduler; with live information every placement is visible to the next job,
with lag the whole batch reads the same snapshot.  A departure jump picks one
queue uniformly and, with probability mu, retires the highest-priority job in
it, doing nothing when the queue is empty.  Measurements are tabulated just
before each burst after the first and at the end of the run; a time series of
system averages is sampled on the snapshot grid throughout.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    MAX_PRIORITY_LEVELS,
    ConfigError,
    RngStream,
    SimConfig,
    _uniform_int,
    optimal_recovery_ratio,
    priority_cdf,
    rng_stream,
)
from .scheduler import _select_from_view, strategy_code

RECOVERY_WINDOW_JUMPS = 10_000


@dataclass(frozen=True)
class BurstSchedule:
    """Burst windows plus the derived recovery and measurement structure.

    Windows are half-open jump intervals ``[start, end)``, equidistant across
    the post-warmup region.  Each is followed by its optimal recovery period
    (the minimum drain time for a perfect scheduler) and a buffer; metrics are
    tabulated at the end of each buffer, i.e. just before the next burst and
    at the end of the run.
    """

    windows: tuple[tuple[int, int], ...]
    burst_rate: float
    optimal_recovery_jumps: tuple[int, ...]
    measurement_jumps: tuple[int, ...]

    @property
    def burst_count(self) -> int:
        return len(self.windows)


def build_burst_schedule(config: SimConfig) -> BurstSchedule:
    """Lay out equidistant burst windows and their measurement points."""
    config.validate()
    total = config.total_jumps
    if config.burst_count == 0:
        return BurstSchedule(
            windows=(),
            burst_rate=config.lam,
            optimal_recovery_jumps=(),
            measurement_jumps=(total,),
        )
    warmup = int(round(config.warmup_fraction * total))
    burst_len = int(round(config.burst_length_fraction * total))
    ratio = optimal_recovery_ratio(config.lam, config.burst_factor)
    recovery = int(round(ratio * burst_len))
    span = total - warmup
    starts = [warmup + (j * span) // config.burst_count for j in range(config.burst_count)]
    windows = []
    for j, start in enumerate(starts):
        end = start + burst_len
        cycle_end = starts[j + 1] if j + 1 < len(starts) else total
        if end + recovery > cycle_end:
            raise ConfigError(
                f"burst_count: burst {j} (length {burst_len} + recovery {recovery} jumps) "
                f"does not fit before jump {cycle_end}"
            )
        windows.append((start, end))
    measurement_jumps = tuple(starts[1:]) + (total,)
    return BurstSchedule(
        windows=tuple(windows),
        burst_rate=config.lam * config.burst_factor,
        optimal_recovery_jumps=(recovery,) * config.burst_count,
        measurement_jumps=measurement_jumps,
    )


@dataclass(frozen=True)
class Measurement:
    """State of all queues at one inspection jump."""

    jump: int
    avg_depth: float
    max_depth: int
    avg_depth_by_priority: tuple[float, ...]  # always 3 entries
    max_depth_by_priority: tuple[int, ...]
    tail_histogram: np.ndarray  # tail_histogram[i] = queues with depth >= i

    def to_json_dict(self) -> dict:
        return {
            "jump": self.jump,
            "avg_depth": self.avg_depth,
            "max_depth": self.max_depth,
            "avg_depth_by_priority": list(self.avg_depth_by_priority),
            "max_depth_by_priority": list(self.max_depth_by_priority),
            "tail_histogram": self.tail_histogram.tolist(),
        }


def measurement_from_counts(counts: np.ndarray, jump: int) -> Measurement:
    totals = counts.sum(axis=1)
    n = len(totals)
    max_depth = int(totals.max(initial=0))
    hist = np.bincount(totals, minlength=max_depth + 1)
    tail = hist[::-1].cumsum()[::-1]  # tail[i] = queues with depth >= i
    return Measurement(
        jump=jump,
        avg_depth=float(totals.mean()),
        max_depth=max_depth,
        avg_depth_by_priority=tuple(counts.mean(axis=0)),
        max_depth_by_priority=tuple(int(x) for x in counts.max(axis=0)),
        tail_histogram=tail,
    )


@dataclass(frozen=True)
class RecoveryReport:
    """Outcome of the sliding-window recovery scan for one burst."""

    burst_index: int
    recovered_at: int | None  # start jump of the first qualifying window
    first_window_start: int
    window_jumps: int

    @property
    def recovered(self) -> bool:
        return self.recovered_at is not None

    @property
    def in_first_window(self) -> bool:
        return self.recovered_at == self.first_window_start

    def to_json_dict(self) -> dict:
        return {
            "burst_index": self.burst_index,
            "recovered_at": self.recovered_at,
            "first_window_start": self.first_window_start,
            "window_jumps": self.window_jumps,
        }


@dataclass
class RunResult:
    """Everything one simulation run produces."""

    config: SimConfig
    schedule: BurstSchedule
    measurements: list[Measurement]
    series_jumps: np.ndarray
    series_avg: np.ndarray
    series_max: np.ndarray
    series_avg_by_priority: np.ndarray  # (T, 3)
    burst_start_avgs: np.ndarray  # avg depth just before each burst begins
    recovery: list[RecoveryReport]
    arrivals: int
    departures: int

    @property
    def pre_burst_baseline(self) -> float | None:
        if len(self.burst_start_avgs) == 0:
            return None
        return float(self.burst_start_avgs[0])

    def mean_avg_depth(self) -> float:
        return float(np.mean([m.avg_depth for m in self.measurements]))

    def mean_max_depth(self) -> float:
        return float(np.mean([m.max_depth for m in self.measurements]))

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "burst_windows": [list(w) for w in self.schedule.windows],
            "measurement_jumps": list(self.schedule.measurement_jumps),
            "measurements": [m.to_json_dict() for m in self.measurements],
            "burst_start_avgs": self.burst_start_avgs.tolist(),
            "recovery": [r.to_json_dict() for r in self.recovery],
            "arrivals": self.arrivals,
            "departures": self.departures,
            "series": {
                "jump": self.series_jumps.tolist(),
                "avg_depth": self.series_avg.tolist(),
                "max_depth": self.series_max.tolist(),
                "avg_depth_by_priority": self.series_avg_by_priority.tolist(),
            },
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)

    def series_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["jump", "avg_depth", "max_depth", "avg_depth_p0", "avg_depth_p1", "avg_depth_p2"]
            )
            for i, jump in enumerate(self.series_jumps):
                writer.writerow(
                    [
                        int(jump),
                        format(self.series_avg[i], ".6g"),
                        int(self.series_max[i]),
                        format(self.series_avg_by_priority[i, 0], ".6g"),
                        format(self.series_avg_by_priority[i, 1], ".6g"),
                        format(self.series_avg_by_priority[i, 2], ".6g"),
                    ]
                )


@njit(cache=True, nogil=True, inline="always")
def _step_jump(
    counts, t, poisson_limit, mu, d, strategy, fuzz, prio_cdf, lag, interval, ring,
    counters, probes, keys, cand, rng,
):
    """Execute one jump of the process.  counters = [total_jobs, arrivals, departures].

    ``poisson_limit`` is exp(-rate) for the arrival rate in force at jump t.
    """
    n = counts.shape[0]
    if rng.random() < 0.5:
        k = -1
        prod = 1.0
        while prod > poisson_limit:
            k += 1
            prod *= rng.random()
        for _ in range(k):
            if prio_cdf[0] >= 1.0:  # single-priority run: no class draw needed
                p = 0
            else:
                u = rng.random()
                p = 1
                if u < prio_cdf[0]:
                    p = 0
                elif u >= prio_cdf[1]:
                    p = 2
            if lag == 0:
                view = counts
            else:
                back = t - lag
                slot = 0 if back < 0 else (back // interval) % ring.shape[0]
                view = ring[slot]
            for j in range(d):
                probes[j] = _uniform_int(rng, n)
            q = _select_from_view(view, probes, d, strategy, p, fuzz, rng, keys, cand)
            counts[q, p] += 1
            counters[0] += 1
            counters[1] += 1
    else:
        q = _uniform_int(rng, n)
        # mu = 1 retires unconditionally; only sub-unit service draws a coin.
        if mu >= 1.0 or rng.random() < mu:
            for lvl in range(MAX_PRIORITY_LEVELS):
                if counts[q, lvl] > 0:
                    counts[q, lvl] -= 1
                    counters[0] -= 1
                    counters[2] += 1
                    break


@njit(cache=True, nogil=True)
def _record_grid(counts, counters, lag, interval, ring, t, ti, ts_avg, ts_max, ts_prio):
    n = counts.shape[0]
    if lag > 0:
        ring[(t // interval) % ring.shape[0], :, :] = counts
    ts_avg[ti] = counters[0] / n
    mx = np.int64(0)
    s0 = np.int64(0)
    s1 = np.int64(0)
    s2 = np.int64(0)
    for q in range(n):
        tot = counts[q, 0] + counts[q, 1] + counts[q, 2]
        if tot > mx:
            mx = tot
        s0 += counts[q, 0]
        s1 += counts[q, 1]
        s2 += counts[q, 2]
    ts_max[ti] = mx
    ts_prio[ti, 0] = s0 / n
    ts_prio[ti, 1] = s1 / n
    ts_prio[ti, 2] = s2 / n


@njit(cache=True, nogil=True)
def _run_loop(
    counts, total_jumps, lam, mu, d, strategy, fuzz, prio_cdf,
    burst_starts, burst_ends, burst_rate, lag, interval, ring,
    ts_avg, ts_max, ts_prio, meas_jumps, meas_states, burst_start_avgs,
    counters, rng,
):
    n = counts.shape[0]
    probes = np.empty(d, dtype=np.int64)
    keys = np.empty(d, dtype=np.int64)
    cand = np.empty(d, dtype=np.int64)
    nb = len(burst_starts)
    nm = len(meas_jumps)
    limit_ambient = math.exp(-lam)
    limit_burst = math.exp(-burst_rate)
    w = 0  # index of the first burst window not yet finished
    mi = 0
    ti = 0
    t = 0
    # The timeline is processed in segments between "events" (snapshot-grid
    # points, burst edges, measurement jumps, end of run) so the hot inner
    # loop below carries no per-jump bookkeeping.
    while True:
        if t % interval == 0:
            _record_grid(counts, counters, lag, interval, ring, t, ti, ts_avg, ts_max, ts_prio)
            ti += 1
        while w < nb and t >= burst_ends[w]:
            w += 1
        if w < nb and t == burst_starts[w]:
            burst_start_avgs[w] = counters[0] / n
        if mi < nm and t == meas_jumps[mi]:
            meas_states[mi, :, :] = counts
            mi += 1
        if t == total_jumps:
            break
        nxt = total_jumps
        g = (t // interval + 1) * interval
        if g < nxt:
            nxt = g
        if w < nb:
            edge = burst_starts[w] if t < burst_starts[w] else burst_ends[w]
            if edge < nxt:
                nxt = edge
        if mi < nm and meas_jumps[mi] < nxt:
            nxt = meas_jumps[mi]
        in_burst = w < nb and t >= burst_starts[w]
        limit = limit_burst if in_burst else limit_ambient
        # Fused copy of _step_jump: per-jump calls cost more than the jump
        # itself, so the body is repeated here.  test_engine.py pins run()
        # and step() to bit-identical trajectories; change both together.
        for tt in range(t, nxt):
            if rng.random() < 0.5:
                k = -1
                prod = 1.0
                while prod > limit:
                    k += 1
                    prod *= rng.random()
                for _ in range(k):
                    if prio_cdf[0] >= 1.0:
                        p = 0
                    else:
                        u = rng.random()
                        p = 1
                        if u < prio_cdf[0]:
                            p = 0
                        elif u >= prio_cdf[1]:
                            p = 2
                    for j in range(d):
                        probes[j] = _uniform_int(rng, n)
                    if lag == 0:
                        q = _select_from_view(
                            counts, probes, d, strategy, p, fuzz, rng, keys, cand
                        )
                    else:
                        back = tt - lag
                        slot = 0 if back < 0 else (back // interval) % ring.shape[0]
                        q = _select_from_view(
                            ring[slot], probes, d, strategy, p, fuzz, rng, keys, cand
                        )
                    counts[q, p] += 1
                    counters[0] += 1
                    counters[1] += 1
            else:
                q = _uniform_int(rng, n)
                if mu >= 1.0 or rng.random() < mu:
                    for lvl in range(MAX_PRIORITY_LEVELS):
                        if counts[q, lvl] > 0:
                            counts[q, lvl] -= 1
                            counters[0] -= 1
                            counters[2] += 1
                            break
        t = nxt


@njit(cache=True, nogil=True)
def _step_once(
    counts, t, lam, mu, d, strategy, fuzz, prio_cdf,
    burst_starts, burst_ends, burst_rate, lag, interval, ring, counters, rng,
):
    """Single public step: grid upkeep plus one jump, matching _run_loop."""
    if t % interval == 0 and lag > 0:
        ring[(t // interval) % ring.shape[0], :, :] = counts
    rate = lam
    for w in range(len(burst_starts)):
        if burst_starts[w] <= t < burst_ends[w]:
            rate = burst_rate
            break
    probes = np.empty(d, dtype=np.int64)
    keys = np.empty(d, dtype=np.int64)
    cand = np.empty(d, dtype=np.int64)
    _step_jump(
        counts, t, math.exp(-rate), mu, d, strategy, fuzz, prio_cdf, lag, interval,
        ring, counters, probes, keys, cand, rng,
    )


@dataclass
class EngineState:
    """Mutable state advanced by :func:`step`; owned by exactly one run."""

    counts: np.ndarray  # (n, 3) int64
    jump: int
    ring: np.ndarray  # (capacity, n, 3) snapshot ring
    counters: np.ndarray  # [total_jobs, arrivals, departures]

    @property
    def total_jobs(self) -> int:
        return int(self.counters[0])


def new_state(config: SimConfig) -> EngineState:
    config.validate()
    counts = np.zeros((config.n, MAX_PRIORITY_LEVELS), dtype=np.int64)
    capacity = config.lag // config.snapshot_interval + 1
    ring = np.zeros((capacity, config.n, MAX_PRIORITY_LEVELS), dtype=np.int64)
    return EngineState(counts=counts, jump=0, ring=ring, counters=np.zeros(3, dtype=np.int64))


def step(
    state: EngineState, config: SimConfig, schedule: BurstSchedule, rng: RngStream
) -> EngineState:
    """Advance the process by one jump (arrival or departure, equiprobably)."""
    starts = np.array([w[0] for w in schedule.windows], dtype=np.int64)
    ends = np.array([w[1] for w in schedule.windows], dtype=np.int64)
    _step_once(
        state.counts, state.jump, config.lam, config.mu, config.d,
        strategy_code(config.strategy), config.fuzz, priority_cdf(config.priority_mix),
        starts, ends, schedule.burst_rate, config.lag, config.snapshot_interval,
        state.ring, state.counters, rng,
    )
    state.jump += 1
    return state


def run(config: SimConfig, run_index: int = 0) -> RunResult:
    """Execute a full simulation run; deterministic given (seed, run_index)."""
    config.validate()
    schedule = build_burst_schedule(config)
    rng = rng_stream(config.seed, run_index)

    n = config.n
    interval = config.snapshot_interval
    counts = np.zeros((n, MAX_PRIORITY_LEVELS), dtype=np.int64)
    capacity = config.lag // interval + 1
    ring = np.zeros((capacity, n, MAX_PRIORITY_LEVELS), dtype=np.int64)
    n_samples = config.total_jumps // interval + 1
    ts_avg = np.zeros(n_samples)
    ts_max = np.zeros(n_samples, dtype=np.int64)
    ts_prio = np.zeros((n_samples, MAX_PRIORITY_LEVELS))
    meas_jumps = np.array(schedule.measurement_jumps, dtype=np.int64)
    meas_states = np.zeros((len(meas_jumps), n, MAX_PRIORITY_LEVELS), dtype=np.int64)
    burst_start_avgs = np.zeros(schedule.burst_count)
    counters = np.zeros(3, dtype=np.int64)
    starts = np.array([w[0] for w in schedule.windows], dtype=np.int64)
    ends = np.array([w[1] for w in schedule.windows], dtype=np.int64)

    _run_loop(
        counts, config.total_jumps, config.lam, config.mu, config.d,
        strategy_code(config.strategy), config.fuzz, priority_cdf(config.priority_mix),
        starts, ends, schedule.burst_rate, config.lag, interval, ring,
        ts_avg, ts_max, ts_prio, meas_jumps, meas_states, burst_start_avgs,
        counters, rng,
    )

    if counters[0] != counters[1] - counters[2] or counters[0] != counts.sum():
        raise RuntimeError(
            f"job conservation violated: {counters[1]} placed - {counters[2]} retired "
            f"!= {counts.sum()} in system"
        )

    measurements = [
        measurement_from_counts(meas_states[i], int(j)) for i, j in enumerate(meas_jumps)
    ]
    result = RunResult(
        config=config,
        schedule=schedule,
        measurements=measurements,
        series_jumps=np.arange(n_samples, dtype=np.int64) * interval,
        series_avg=ts_avg,
        series_max=ts_max,
        series_avg_by_priority=ts_prio,
        burst_start_avgs=burst_start_avgs,
        recovery=[],
        arrivals=int(counters[1]),
        departures=int(counters[2]),
    )
    result.recovery = detect_recovery(result, schedule)
    return result


def detect_recovery(
    result: RunResult, schedule: BurstSchedule, window: int = RECOVERY_WINDOW_JUMPS
) -> list[RecoveryReport]:
    """Scan sliding windows after each optimal recovery period.

    A burst counts as recovered at the first window (width ``window`` jumps,
    advanced one time-series sample at a time) whose mean system average depth
    is back at or below the level recorded just before the first burst.
    """
    if schedule.burst_count == 0:
        return []
    interval = int(result.series_jumps[1] - result.series_jumps[0]) if len(result.series_jumps) > 1 else 1
    total = int(result.config.total_jumps)
    baseline = result.pre_burst_baseline
    samples_per_window = max(1, window // interval)
    reports = []
    for w, (start, end) in enumerate(schedule.windows):
        scan_start = end + schedule.optimal_recovery_jumps[w]
        scan_end = schedule.windows[w + 1][0] if w + 1 < schedule.burst_count else total
        first_pos = -(-scan_start // interval) * interval  # align up to the grid
        recovered_at = None
        pos = first_pos
        while pos + window <= scan_end:
            lo = pos // interval
            mean = result.series_avg[lo : lo + samples_per_window].mean()
            if mean <= baseline:
                recovered_at = pos
                break
            pos += interval
        reports.append(
            RecoveryReport(
                burst_index=w,
                recovered_at=recovered_at,
                first_window_start=first_pos,
                window_jumps=window,
            )
        )
    return reports
