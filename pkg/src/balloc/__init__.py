"""Simulation and analysis lab for d-way balanced allocation across n queues."""

from .analysis import (
    EffectiveLoad,
    InstabilityError,
    TailDistribution,
    baseline_tail,
    effective_loads,
    fuzz_beta,
    fuzz_tail,
    fuzz_tail_recurrence,
    max_depth_estimate,
    priority_tail,
)
from .core import (
    ConfigError,
    Priority,
    QueueState,
    SimConfig,
    cumulative_depth,
    optimal_recovery_ratio,
    poisson_sample,
    rng_stream,
    total_depth,
)
from .engine import (
    BurstSchedule,
    EngineState,
    Measurement,
    RecoveryReport,
    RunResult,
    build_burst_schedule,
    detect_recovery,
    new_state,
    run,
    step,
)
from .experiments import (
    AggregateRow,
    ExperimentSpec,
    compare_to_theory,
    run_experiment,
    sweep_d_vs_lag,
)
from .scheduler import (
    DepthView,
    SnapshotStore,
    fuzzy_select,
    make_snapshot,
    probe,
    select_queue,
    view_for_jump,
)

__version__ = "0.1.0"
