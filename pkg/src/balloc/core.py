"""Core domain types and sampling primitives shared by the simulator and scheduler.

The system under study is a bank of ``n`` queues fed by a dispatcher that
probes ``d`` queues per job and joins one of them.  Everything in this module
is a plain value type: configurations, per-queue job counts, and the
deterministic random-number contract that makes whole simulation runs
reproducible from a single 64-bit seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from enum import IntEnum
from fractions import Fraction

import numpy as np
from numba import njit

MAX_PRIORITY_LEVELS = 3

# Strategy names as they appear in config files and on the CLI.
STRATEGY_NAMES = (
    "independent",
    "mine-then-total",
    "total-then-mine",
    "cumulative-then-total",
)


class Priority(IntEnum):
    """Job priority level; lower value is served first."""

    P0 = 0
    P1 = 1
    P2 = 2


class ConfigError(ValueError):
    """A simulation configuration violates one of its invariants."""


@dataclass
class QueueState:
    """Per-priority job counts for one queue.

    ``counts[p]`` is the number of queued jobs at priority level ``p``.
    """

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 1 or len(self.counts) > MAX_PRIORITY_LEVELS:
            raise ValueError("counts must be a vector of at most 3 levels")
        if (self.counts < 0).any():
            raise ValueError("job counts must be non-negative")


def total_depth(q: QueueState) -> int:
    """Total number of queued jobs across all priority levels."""
    return int(q.counts.sum())


def cumulative_depth(q: QueueState, p: Priority | int) -> int:
    """Number of queued jobs at priority ``p`` or higher (levels <= p)."""
    level = int(p)
    if not 0 <= level < len(q.counts):
        raise ValueError(f"priority level {level} out of range")
    return int(q.counts[: level + 1].sum())


@dataclass(frozen=True)
class SimConfig:
    """Full description of one simulation run.

    ``lam`` is the ambient mean number of arriving jobs per arrival jump;
    during a burst window it is multiplied by ``burst_factor``.  ``mu`` is the
    probability that a departure jump actually retires a job from the queue
    it picks.  ``lag`` > 0 makes the dispatcher read queue depths from a
    periodic snapshot that many jumps old instead of the live state.
    ``fuzz`` widens depth comparisons: probes within ``fuzz`` of the minimum
    count as tied and the winner is picked uniformly at random.
    """

    n: int = 1000
    lam: float = 0.95
    mu: float = 1.0
    total_jumps: int = 12_000_000
    d: int = 2
    burst_count: int = 0
    burst_factor: float = 1.2
    burst_length_fraction: float = 0.02
    warmup_fraction: float = 0.60
    priority_mix: tuple[float, ...] = (1 / 3, 1 / 3, 1 / 3)
    strategy: str = "independent"
    lag: int = 0
    snapshot_interval: int = 2000
    fuzz: int = 0
    seed: int = 0

    # JSON field names follow the external schema; "lambda" is a Python
    # keyword so the attribute is called lam.
    _JSON_NAMES = {"lam": "lambda"}

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("n: queue count must be >= 1")
        # lam == 0 is the degenerate no-arrivals system, useful for testing.
        if not 0 <= self.lam < self.mu or not self.mu <= 1:
            raise ConfigError(
                f"lambda/mu: need 0 <= lambda < mu <= 1 for stability, "
                f"got lambda={self.lam}, mu={self.mu}"
            )
        if self.total_jumps < 1:
            raise ConfigError("total_jumps: must be >= 1")
        if self.d < 1:
            raise ConfigError("d: probe count must be >= 1")
        if self.burst_count < 0:
            raise ConfigError("burst_count: must be >= 0")
        if self.burst_factor <= 0:
            raise ConfigError("burst_factor: must be positive")
        if not 0 < self.burst_length_fraction < 1 or not 0 <= self.warmup_fraction < 1:
            raise ConfigError("burst_length_fraction/warmup_fraction: must lie in (0, 1)")
        mix = self.priority_mix
        if not 1 <= len(mix) <= MAX_PRIORITY_LEVELS:
            raise ConfigError("priority_mix: need between 1 and 3 levels")
        if any(p < 0 for p in mix) or abs(sum(mix) - 1.0) > 1e-9:
            raise ConfigError("priority_mix: entries must be >= 0 and sum to 1")
        if self.strategy not in STRATEGY_NAMES:
            raise ConfigError(
                f"strategy: unknown name {self.strategy!r}; expected one of {STRATEGY_NAMES}"
            )
        if self.snapshot_interval < 1:
            raise ConfigError("snapshot_interval: must be >= 1")
        if self.lag < 0 or (self.lag > 0 and self.lag % self.snapshot_interval != 0):
            raise ConfigError(
                f"lag: must be 0 or a positive multiple of snapshot_interval "
                f"(got lag={self.lag}, snapshot_interval={self.snapshot_interval})"
            )
        if self.fuzz < 0:
            raise ConfigError("fuzz: must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed: must fit in 64 bits")

    @property
    def levels(self) -> int:
        return len(self.priority_mix)

    def to_json_dict(self) -> dict:
        doc = {}
        for f in fields(self):
            doc[self._JSON_NAMES.get(f.name, f.name)] = getattr(self, f.name)
        doc["priority_mix"] = list(self.priority_mix)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SimConfig":
        reverse = {v: k for k, v in cls._JSON_NAMES.items()}
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in doc.items():
            attr = reverse.get(key, key)
            if attr not in known or key == "lam":
                raise ConfigError(f"unknown config field: {key!r}")
            kwargs[attr] = value
        if "priority_mix" in kwargs:
            kwargs["priority_mix"] = tuple(kwargs["priority_mix"])
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        return cls.from_json_dict(json.loads(text))

    def with_overrides(self, **kwargs) -> "SimConfig":
        if "priority_mix" in kwargs and kwargs["priority_mix"] is not None:
            kwargs["priority_mix"] = tuple(kwargs["priority_mix"])
        clean = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **clean)


RngStream = np.random.Generator


def rng_stream(seed: int, run_index: int = 0) -> RngStream:
    """Deterministic per-run random stream.

    Streams are derived from ``(seed, run_index)`` with a counter-based
    generator, so replicate ``r`` of an experiment gets the same bits whether
    it runs alone, in a different batch, or on a different thread.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(run_index,))
    return np.random.Generator(np.random.Philox(ss))


_TWO53 = 9007199254740992  # random() yields exact multiples of 2**-53


@njit(cache=True, nogil=True, inline="always")
def _uniform_int(rng, n: int) -> int:
    # Exactly uniform on [0, n) and much cheaper than Generator.integers:
    # one random() is an exactly uniform 53-bit integer, rejected on the
    # (never-in-practice) overhang above the largest multiple of n.
    lim = _TWO53 - (_TWO53 % n)
    while True:
        x = np.int64(rng.random() * _TWO53)
        if x < lim:
            return x % n


@njit(cache=True, nogil=True, inline="always")
def _poisson_draw(rng, rate: float) -> int:
    # Knuth's product-of-uniforms method: exact for the small rates
    # (<= ~50) used here, unlike a normal approximation.
    if rate <= 0.0:
        return 0
    limit = math.exp(-rate)
    k = -1
    prod = 1.0
    while prod > limit:
        k += 1
        prod *= rng.random()
    return k


def poisson_sample(rate: float, rng: RngStream) -> int:
    """Draw an exact Poisson(rate) variate.

    Uses the product method, so every value of the support can occur with
    its exact probability; intended for the simulation regime rate <= ~50.
    """
    if rate < 0:
        raise ValueError(f"rate must be non-negative, got {rate}")
    return int(_poisson_draw(rng, float(rate)))


def optimal_recovery_ratio(lam: float, burst_factor: float) -> float:
    """Minimum drain time per unit of burst, for a perfectly informed scheduler.

    A burst raises the arrival rate to ``lam * burst_factor``; every unit of
    burst duration then leaves ``(lam * burst_factor - 1)`` excess work that an
    ideal scheduler retires at rate ``(1 - lam)``.  Bursts that stay under
    capacity need no dedicated recovery, hence the clamp at zero.

    The quotient is evaluated in exact decimal-rational arithmetic so that
    decimal-specified rates give the mathematically exact ratio (e.g. 2.8,
    not 2.8 minus float dust).
    """
    if lam >= 1:
        raise ValueError(f"lambda must be < 1, got {lam}")
    num = Fraction(str(lam)) * Fraction(str(burst_factor)) - 1
    if num <= 0:
        return 0.0
    return float(num / (1 - Fraction(str(lam))))


def priority_cdf(mix: tuple[float, ...]) -> np.ndarray:
    """Cumulative mix padded to the fixed 3-level layout used internally."""
    cdf = np.ones(MAX_PRIORITY_LEVELS, dtype=np.float64)
    acc = 0.0
    for lvl, p in enumerate(mix):
        acc += p
        cdf[lvl] = acc
    # guard against round-off excluding the last level
    cdf[len(mix) - 1 :] = 1.0
    return cdf
