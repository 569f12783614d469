"""Queue selection: d-way probing, priority strategies, fuzz, and lagged views.

The dispatcher draws ``d`` probe indices with replacement, reads their depths
through a :class:`DepthView` (live state or an old snapshot), and picks a
destination according to one of four strategies:

* ``independent``         - fewest jobs of the arriving priority
* ``mine-then-total``     - same primary key, ties broken by total depth
* ``total-then-mine``     - lowest total depth, ties broken by own-priority count
* ``cumulative-then-total`` - fewest jobs at the arriving priority or higher,
                              ties broken by total depth

A fuzz of ``b`` treats primary keys within ``b`` of the observed minimum as
tied; the band applies to the primary key only, secondary comparisons are
exact.  All residual ties are resolved uniformly at random from the given
stream, never by probe order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import Priority, RngStream, _uniform_int

# Integer codes for the strategies, in wire-name order.
INDEPENDENT, MINE_THEN_TOTAL, TOTAL_THEN_MINE, CUMULATIVE_THEN_TOTAL = range(4)

_STRATEGY_CODES = {
    "independent": INDEPENDENT,
    "mine-then-total": MINE_THEN_TOTAL,
    "total-then-mine": TOTAL_THEN_MINE,
    "cumulative-then-total": CUMULATIVE_THEN_TOTAL,
}


def strategy_code(name: str) -> int:
    try:
        return _STRATEGY_CODES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}") from None


@dataclass(frozen=True)
class DepthView:
    """Read-only accessor for per-queue, per-priority job counts.

    ``snapshot`` views are deep copies frozen at ``as_of_jump``; the ``live``
    view aliases the simulator's state and always reflects it.
    """

    source: str  # "live" | "snapshot"
    depths: np.ndarray  # (n, levels) int64
    as_of_jump: int

    def depth(self, queue: int, priority: int = 0) -> int:
        return int(self.depths[queue, priority])


def make_snapshot(queues, jump: int) -> DepthView:
    """Immutable copy of every per-priority count, labeled with its jump."""
    if isinstance(queues, np.ndarray):
        depths = queues.astype(np.int64, copy=True)
    else:
        depths = np.stack([np.asarray(q.counts, dtype=np.int64) for q in queues])
    depths.setflags(write=False)
    return DepthView(source="snapshot", depths=depths, as_of_jump=jump)


class SnapshotStore:
    """Ring of periodic snapshots, retaining just enough for the configured lag.

    Single writer (the simulation engine), any number of readers.  Capacity is
    ``lag / interval + 1`` so the oldest retained snapshot is exactly the one a
    query at the current jump needs.
    """

    def __init__(self, live: np.ndarray, lag: int, interval: int):
        if interval < 1:
            raise ValueError("interval must be >= 1")
        if lag < 0 or (lag > 0 and lag % interval != 0):
            raise ValueError("lag must be 0 or a multiple of interval")
        self.live = live
        self.lag = lag
        self.interval = interval
        self.capacity = lag // interval + 1
        self._ring: list[DepthView | None] = [None] * self.capacity
        # Slot 0 starts as the empty-system snapshot at jump 0.
        empty = np.zeros_like(live)
        self._ring[0] = make_snapshot(empty, 0)

    def record(self, jump: int) -> None:
        if jump % self.interval != 0:
            raise ValueError("snapshots are taken on the interval grid")
        slot = (jump // self.interval) % self.capacity
        self._ring[slot] = make_snapshot(self.live, jump)

    def get(self, snap_jump: int) -> DepthView:
        slot = (snap_jump // self.interval) % self.capacity
        view = self._ring[slot]
        if view is None or view.as_of_jump != snap_jump:
            raise KeyError(f"snapshot at jump {snap_jump} is not retained")
        return view


def snapshot_jump_for(t: int, lag: int, interval: int) -> int:
    """Grid jump of the snapshot serving a query at jump t under the given lag."""
    return max(0, (t - lag) // interval) * interval


def view_for_jump(t: int, lag: int, interval: int, store: SnapshotStore) -> DepthView:
    """View the dispatcher must use at jump ``t``.

    lag = 0 means live information.  Otherwise the snapshot taken at
    ``floor((t - lag)/interval) * interval`` serves the whole following
    interval, clamped to the initial empty-system snapshot for early jumps.
    """
    if lag == 0:
        return DepthView(source="live", depths=store.live, as_of_jump=t)
    return store.get(snapshot_jump_for(t, lag, interval))


@njit(cache=True, nogil=True)
def _probe_into(rng, n, d, out):
    for j in range(d):
        out[j] = _uniform_int(rng, n)


def probe(rng: RngStream, n: int, d: int) -> np.ndarray:
    """Draw d queue indices uniformly at random WITH replacement.

    Order is preserved; independence across probes is what the analytical
    tail laws assume, and at n in the hundreds the collision probability is
    negligible anyway.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = np.empty(d, dtype=np.int64)
    _probe_into(rng, n, d, out)
    return out


@njit(cache=True, nogil=True)
def _fuzzy_pick(keys, fuzz, rng, cand):
    """Index (into keys) of a uniformly random entry within fuzz of the minimum."""
    m = keys[0]
    for j in range(1, len(keys)):
        if keys[j] < m:
            m = keys[j]
    c = 0
    for j in range(len(keys)):
        if keys[j] <= m + fuzz:
            cand[c] = j
            c += 1
    if c == 1:
        return cand[0]
    return cand[_uniform_int(rng, c)]


def fuzzy_select(values, fuzz: int, rng: RngStream) -> int:
    """Pick uniformly among entries whose key is within ``fuzz`` of the minimum.

    ``values`` is a sequence of (index, key) pairs; returns the chosen index.
    With fuzz = 0 this is exact-minimum selection with uniform tie-breaking.
    """
    values = list(values)
    if not values:
        raise ValueError("values must be non-empty")
    if fuzz < 0:
        raise ValueError(f"fuzz must be >= 0, got {fuzz}")
    keys = np.array([k for _, k in values], dtype=np.int64)
    cand = np.empty(len(keys), dtype=np.int64)
    pos = _fuzzy_pick(keys, fuzz, rng, cand)
    return values[int(pos)][0]


@njit(cache=True, nogil=True, inline="always")
def _select_from_view(view, probes, d, strategy, p, fuzz, rng, keys, cand):
    """Destination queue for one job, given probe indices and a depth view.

    Primary keys get the fuzz band anchored at their minimum; two-key
    strategies then take the exact secondary minimum inside the band.
    Residual ties are uniform over the tied probes (duplicate probes of one
    queue count once per probe).
    """
    levels = view.shape[1]
    for j in range(d):
        q = probes[j]
        if strategy == 0 or strategy == 1:  # independent / mine-then-total
            keys[j] = view[q, p]
        elif strategy == 2:  # total-then-mine
            tot = 0
            for lvl in range(levels):
                tot += view[q, lvl]
            keys[j] = tot
        else:  # cumulative-then-total
            cum = 0
            for lvl in range(p + 1):
                cum += view[q, lvl]
            keys[j] = cum

    m = keys[0]
    for j in range(1, d):
        if keys[j] < m:
            m = keys[j]

    if strategy == 0:
        c = 0
        for j in range(d):
            if keys[j] <= m + fuzz:
                cand[c] = probes[j]
                c += 1
    else:
        best = np.int64(0)
        c = 0
        for j in range(d):
            if keys[j] > m + fuzz:
                continue
            q = probes[j]
            if strategy == 2:  # secondary: own-priority count
                sec = view[q, p]
            else:  # secondary: total depth
                sec = 0
                for lvl in range(levels):
                    sec += view[q, lvl]
            if c == 0 or sec < best:
                best = sec
                cand[0] = q
                c = 1
            elif sec == best:
                cand[c] = q
                c += 1
    if c == 1:
        return cand[0]
    return cand[_uniform_int(rng, c)]


def select_queue(
    view: DepthView,
    probes,
    strategy: str | int,
    p: Priority | int,
    fuzz: int,
    rng: RngStream,
) -> int:
    """Apply a priority strategy to the probed queues and return the winner."""
    probes = np.asarray(probes, dtype=np.int64)
    if probes.size == 0:
        raise ValueError("probes must be non-empty")
    depths = view.depths
    if probes.min() < 0 or probes.max() >= depths.shape[0]:
        raise ValueError("probe index out of range for this view")
    code = strategy_code(strategy) if isinstance(strategy, str) else int(strategy)
    level = int(p)
    if not 0 <= level < depths.shape[1]:
        raise ValueError(f"priority level {level} out of range")
    d = len(probes)
    keys = np.empty(d, dtype=np.int64)
    cand = np.empty(d, dtype=np.int64)
    return int(
        _select_from_view(depths, probes, d, code, level, int(fuzz), rng, keys, cand)
    )
