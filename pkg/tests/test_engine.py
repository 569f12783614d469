"""Jump-process semantics: bursts, measurements, recovery, conservation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balloc.analysis import baseline_tail
from balloc.core import ConfigError, SimConfig, rng_stream
from balloc.engine import (
    BurstSchedule,
    Measurement,
    RecoveryReport,
    RunResult,
    build_burst_schedule,
    detect_recovery,
    measurement_from_counts,
    new_state,
    run,
    step,
)


def small_config(**kwargs) -> SimConfig:
    base = dict(n=50, lam=0.9, d=2, total_jumps=30_000, priority_mix=(1.0,),
                snapshot_interval=1000, seed=3)
    base.update(kwargs)
    return SimConfig(**base)


class TestBurstSchedule:
    def test_no_bursts_single_measurement_at_end(self):
        sched = build_burst_schedule(SimConfig(priority_mix=(1.0,)))
        assert sched.windows == ()
        assert sched.measurement_jumps == (12_000_000,)

    def test_single_burst_starts_at_warmup(self):
        cfg = SimConfig(burst_count=1, priority_mix=(1.0,))
        sched = build_burst_schedule(cfg)
        assert sched.windows[0][0] == 7_200_000
        assert sched.windows[0][1] == 7_440_000  # 2% of the run long

    def test_optimal_recovery_is_5_6_percent(self):
        # ratio 2.8 at (0.95, 1.2) times a 2% burst = 5.6% of the run
        sched = build_burst_schedule(SimConfig(burst_count=1, priority_mix=(1.0,)))
        assert sched.optimal_recovery_jumps[0] == int(0.056 * 12_000_000)

    def test_equidistant_starts_and_measurements(self):
        cfg = SimConfig(burst_count=4, priority_mix=(1.0,))
        sched = build_burst_schedule(cfg)
        starts = [w[0] for w in sched.windows]
        assert starts == [7_200_000, 8_400_000, 9_600_000, 10_800_000]
        assert sched.measurement_jumps == (8_400_000, 9_600_000, 10_800_000, 12_000_000)

    def test_burst_rate_is_scaled_lambda(self):
        sched = build_burst_schedule(SimConfig(burst_count=1, priority_mix=(1.0,)))
        assert sched.burst_rate == pytest.approx(0.95 * 1.2)

    def test_overflowing_schedule_rejected(self):
        # six cycles of 6.67% cannot hold burst 2% + recovery 5.6%
        with pytest.raises(ConfigError, match="burst"):
            build_burst_schedule(SimConfig(burst_count=6, priority_mix=(1.0,)))

    def test_windows_fit_below_capacity_without_recovery(self):
        sched = build_burst_schedule(
            SimConfig(lam=0.75, burst_count=4, priority_mix=(1.0,))
        )
        assert sched.optimal_recovery_jumps == (0, 0, 0, 0)


class TestStep:
    def test_departures_on_empty_system_do_nothing(self):
        cfg = small_config(lam=0.0, mu=1.0)
        sched = build_burst_schedule(cfg)
        state = new_state(cfg)
        rng = rng_stream(cfg.seed)
        for _ in range(500):
            step(state, cfg, sched, rng)
        assert state.counts.sum() == 0
        assert state.total_jobs == 0

    def test_departure_retires_highest_priority_first(self):
        cfg = small_config(n=1, lam=0.0, priority_mix=(1 / 3, 1 / 3, 1 / 3))
        sched = build_burst_schedule(cfg)
        state = new_state(cfg)
        state.counts[0] = (0, 2, 5)
        state.counters[0] = 7
        rng = rng_stream(0)
        while state.counts.sum() == 7:
            step(state, cfg, sched, rng)
        assert state.counts[0].tolist() == [0, 1, 5]

    def test_run_matches_repeated_step_bit_for_bit(self):
        # run() uses a fused loop; step() is the reference path.  Both must
        # consume the stream identically on every feature combination.
        configs = [
            small_config(),
            small_config(d=4, fuzz=2),
            small_config(priority_mix=(0.5, 0.3, 0.2), strategy="mine-then-total"),
            small_config(lag=2000, strategy="total-then-mine"),
            small_config(burst_count=2, warmup_fraction=0.4, lag=1000,
                         priority_mix=(0.6, 0.4), strategy="cumulative-then-total"),
            small_config(lam=0.8, mu=0.9),
        ]
        for cfg in configs:
            sched = build_burst_schedule(cfg)
            result = run(cfg)
            state = new_state(cfg)
            rng = rng_stream(cfg.seed, 0)
            for _ in range(cfg.total_jumps):
                step(state, cfg, sched, rng)
            final = result.measurements[-1]
            by_step = measurement_from_counts(state.counts, cfg.total_jumps)
            assert by_step.tail_histogram.tolist() == final.tail_histogram.tolist()
            assert by_step.avg_depth == final.avg_depth
            assert by_step.avg_depth_by_priority == final.avg_depth_by_priority
            assert state.counters[1] == result.arrivals, cfg
            assert state.counters[2] == result.departures, cfg


class TestRun:
    def test_no_arrivals_all_measurements_zero(self):
        result = run(small_config(lam=0.0, burst_count=2, warmup_fraction=0.4))
        assert all(m.avg_depth == 0 and m.max_depth == 0 for m in result.measurements)
        assert result.series_avg.max() == 0

    def test_deterministic_given_seed(self):
        a, b = run(small_config()), run(small_config())
        assert (a.series_avg == b.series_avg).all()
        assert a.measurements[-1].tail_histogram.tolist() == b.measurements[-1].tail_histogram.tolist()
        c = run(small_config(seed=4))
        assert not (a.series_avg == c.series_avg).all()

    def test_job_conservation(self):
        result = run(small_config(burst_count=1, warmup_fraction=0.5))
        final = result.measurements[-1]
        assert result.arrivals - result.departures == round(final.avg_depth * result.config.n)

    @given(
        n=st.integers(min_value=1, max_value=40),
        d=st.integers(min_value=1, max_value=5),
        lam=st.floats(min_value=0.1, max_value=0.95),
        levels=st.integers(min_value=1, max_value=3),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    @settings(max_examples=15, deadline=None)
    def test_conservation_property(self, n, d, lam, levels, seed):
        mix = tuple([1.0 / levels] * levels)
        cfg = SimConfig(n=n, lam=lam, d=d, total_jumps=4000, priority_mix=mix,
                        snapshot_interval=500, seed=seed)
        result = run(cfg)
        totals = result.measurements[-1].tail_histogram
        assert result.arrivals - result.departures == int(
            round(result.measurements[-1].avg_depth * n)
        )
        assert totals[0] == n

    def test_measurement_jumps_match_schedule(self):
        cfg = small_config(burst_count=2, warmup_fraction=0.4)
        result = run(cfg)
        sched = build_burst_schedule(cfg)
        assert tuple(m.jump for m in result.measurements) == sched.measurement_jumps

    def test_tail_histogram_consistency(self):
        result = run(small_config())
        m = result.measurements[-1]
        tail = m.tail_histogram
        n = result.config.n
        assert tail[0] == n
        assert (np.diff(tail) <= 0).all()
        exact = -np.diff(np.append(tail, 0))  # queues with depth exactly i
        assert exact.sum() == n
        assert m.avg_depth == pytest.approx((np.arange(len(exact)) * exact).sum() / n)

    def test_series_csv_schema(self, tmp_path):
        result = run(small_config(total_jumps=5000))
        path = tmp_path / "series.csv"
        result.series_to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "jump,avg_depth,max_depth,avg_depth_p0,avg_depth_p1,avg_depth_p2"
        assert len(lines) == 2 + 5000 // 1000

    def test_geometric_tail_for_random_assignment(self):
        # d=1 queues are independent M/M/1's; terminal tails averaged over
        # ten 12M-jump runs track lambda^i.  A single run's empirical tail
        # sits ~0.04 from the law in sup norm just from sampling noise, so
        # the check pools replicates.
        cfg = SimConfig(lam=0.95, d=1, priority_mix=(1.0,), seed=11)
        law = baseline_tail(0.95, 1)
        width = len(law.s)
        acc = np.zeros(width)
        reps = 10
        for r in range(reps):
            tail = run(cfg, run_index=r).measurements[-1].tail_histogram / cfg.n
            take = min(width, len(tail))
            acc[:take] += tail[:take]
        emp = acc / reps
        sup = np.abs(emp - law.s[:width]).max()
        assert sup < 0.02

    def test_d2_stabilizes_within_first_five_percent(self):
        cfg = SimConfig(lam=0.95, d=2, priority_mix=(1.0,), total_jumps=2_000_000, seed=5)
        result = run(cfg)
        terminal = result.series_avg[-200:].mean()
        cut = len(result.series_avg) // 20  # first 5% of samples
        # block-average the series to judge the level, not per-sample noise
        tail = result.series_avg[cut:]
        tail = tail[: len(tail) // 100 * 100]
        blocks = tail.reshape(-1, 100).mean(axis=1)
        assert np.abs(blocks - terminal).max() < 0.1 * terminal

    def test_more_bursts_never_drain_for_random(self):
        # per-seed mean depth at run end is non-decreasing in burst count
        depths = []
        for count in (0, 2, 4):
            cfg = SimConfig(n=200, lam=0.95, d=1, total_jumps=400_000,
                            burst_count=count, priority_mix=(1.0,), seed=21)
            per_seed = [run(cfg, run_index=r).measurements[-1].avg_depth for r in range(5)]
            depths.append(np.mean(per_seed))
        assert depths[0] <= depths[1] <= depths[2]


class TestDetectRecovery:
    def synthetic_result(self, series, interval=1000, total=40_000, baseline=2.0):
        cfg = SimConfig(n=10, total_jumps=total, snapshot_interval=interval,
                        priority_mix=(1.0,), burst_count=1, warmup_fraction=0.25,
                        burst_length_fraction=0.05, lam=0.5, burst_factor=1.2)
        sched = BurstSchedule(
            windows=((10_000, 12_000),),
            burst_rate=0.6,
            optimal_recovery_jumps=(3000,),
            measurement_jumps=(total,),
        )
        jumps = np.arange(0, total + 1, interval)
        result = RunResult(
            config=cfg, schedule=sched, measurements=[],
            series_jumps=jumps, series_avg=np.asarray(series, dtype=float),
            series_max=np.zeros(len(jumps), dtype=np.int64),
            series_avg_by_priority=np.zeros((len(jumps), 3)),
            burst_start_avgs=np.array([baseline]),
            recovery=[], arrivals=0, departures=0,
        )
        return result, sched

    def test_zero_bursts_empty_report(self):
        result = run(small_config())
        assert detect_recovery(result, build_burst_schedule(small_config())) == []

    def test_recovery_found_in_first_window(self):
        series = np.full(41, 5.0)
        series[16:] = 1.5  # at/below baseline from jump 16000 on
        result, sched = self.synthetic_result(series)
        (report,) = detect_recovery(result, sched, window=10_000)
        assert report.first_window_start == 15_000
        assert report.recovered_at == 15_000
        assert report.in_first_window

    def test_recovery_found_later(self):
        # level 1.9 after jump 30000: any window still holding a 5.0 sample
        # averages above the 2.0 baseline, so the first clean window wins
        series = np.full(41, 5.0)
        series[30:] = 1.9
        result, sched = self.synthetic_result(series)
        (report,) = detect_recovery(result, sched, window=10_000)
        assert report.recovered_at == 30_000
        assert not report.in_first_window

    def test_never_recovered(self):
        series = np.full(41, 5.0)
        result, sched = self.synthetic_result(series)
        (report,) = detect_recovery(result, sched, window=10_000)
        assert report.recovered_at is None
        assert not report.recovered

    def test_window_mean_not_single_sample(self):
        # one dip below baseline must not count if the window mean stays high
        series = np.full(41, 5.0)
        series[20] = 0.0
        result, sched = self.synthetic_result(series)
        (report,) = detect_recovery(result, sched, window=10_000)
        assert report.recovered_at is None

    def test_fast_scheduler_recovers(self):
        cfg = SimConfig(lam=0.95, d=4, total_jumps=2_000_000, burst_count=1,
                        priority_mix=(1.0,), seed=9)
        result = run(cfg)
        (report,) = result.recovery
        assert report.recovered

    def test_random_assignment_does_not_recover(self):
        cfg = SimConfig(lam=0.95, d=1, total_jumps=2_000_000, burst_count=1,
                        priority_mix=(1.0,), seed=9)
        result = run(cfg)
        (report,) = result.recovery
        assert report.recovered_at is None
