"""Closed-form steady-state queue-depth distributions and numeric solvers.

All results are expressed as tail sequences ``s[i]`` = fraction of queues
holding at least ``i`` jobs.  Under d-way balanced allocation the tail decays
doubly exponentially, ``s_i = lam^((d^i - 1)/(d - 1))``; priorities rescale
the load class by class, and fuzzy comparisons replace the decay exponent by
a power of the principal root of ``r^(b+1) - r^b - (d-1)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

DEFAULT_EPS = 1e-12
I_MAX = 10_000  # runaway guard for the series truncation


class InstabilityError(ValueError):
    """Requested load cannot reach a steady state (effective rate >= 1)."""


@dataclass(frozen=True)
class TailDistribution:
    """Tail sequence with truncation metadata.

    ``s[i]`` is the probability that a queue holds >= i jobs, for
    i = 0..i_max; ``s[0]`` is 1 by construction.  The series is truncated at
    the first term below ``truncation_epsilon``, which bounds the error of
    ``expected_depth`` by a geometric tail of the same size.
    ``empty_fraction`` is the steady-state probability of an empty queue.
    """

    s: np.ndarray
    expected_depth: float
    empty_fraction: float
    truncation_epsilon: float
    params: dict = field(default_factory=dict)

    @property
    def i_max(self) -> int:
        return len(self.s) - 1

    def to_csv(self, path, n: int | None = None) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "s_i", "n_times_s_i"])
            for i, si in enumerate(self.s):
                scaled = "" if n is None else format(n * si, ".6g")
                writer.writerow([i, format(si, ".6g"), scaled])


def _build_tail(exponents, lam: float, eps: float, params: dict) -> TailDistribution:
    """Assemble a tail from a generator of decay exponents for i = 1, 2, ..."""
    s = [1.0]
    total = 0.0
    log_lam = np.log(lam) if lam > 0 else -np.inf
    for e in exponents:
        si = float(np.exp(e * log_lam)) if lam > 0 else 0.0
        if si < eps or len(s) > I_MAX:
            break
        s.append(si)
        total += si
    return TailDistribution(
        s=np.array(s),
        expected_depth=total,
        empty_fraction=1.0 - lam,
        truncation_epsilon=eps,
        params=params,
    )


def _baseline_exponents(d: int):
    i = 1
    while True:
        # d = 1 is the analytic limit of (d^i - 1)/(d - 1), i.e. plain i.
        yield i if d == 1 else (d**i - 1) / (d - 1)
        i += 1


def baseline_tail(lam: float, d: int, eps: float = DEFAULT_EPS) -> TailDistribution:
    """Steady-state tail for d-way balanced allocation at arrival rate lam.

    For d >= 2 this is the double-exponential law
    ``s_i = lam^((d^i - 1)/(d - 1))``; for d = 1 it degenerates to the
    geometric tail ``s_i = lam^i`` of independent M/M/1 queues.
    """
    if not 0 <= lam < 1:
        raise ValueError(f"lambda must lie in [0, 1), got {lam}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    params = {"lambda": lam, "d": d, "b": 0, "priority": None}
    return _build_tail(_baseline_exponents(d), lam, eps, params)


def effective_loads(lambdas) -> np.ndarray:
    """Per-class effective loads rho_k = lam_k / (1 - sum of higher-class rates).

    Class k only sees the service capacity left over by classes above it, so
    its queue-depth distribution matches a single-class system at rho_k.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if (lambdas <= 0).any():
        raise ValueError("all class rates must be positive")
    rhos = np.empty_like(lambdas)
    higher = 0.0
    for k, lk in enumerate(lambdas):
        rest = 1.0 - higher
        if lk >= rest:
            raise InstabilityError(
                f"priority class {k} is unstable: rate {lk} >= remaining capacity {rest:.6g}"
            )
        rhos[k] = lk / rest
        higher += lk
    return rhos


@dataclass(frozen=True)
class EffectiveLoad:
    """Effective per-priority loads for a stable multi-class system."""

    rhos: tuple[float, ...]

    @classmethod
    def from_rates(cls, lambdas) -> "EffectiveLoad":
        return cls(rhos=tuple(effective_loads(lambdas)))


def priority_tail(lambdas, ds, k: int, eps: float = DEFAULT_EPS) -> TailDistribution:
    """Tail of the class-k job count per queue under the Independent strategy.

    Class k behaves exactly like a single-class system running at its
    effective load rho_k with ds[k] probes; in particular the top class is
    oblivious to all lower-class traffic.
    """
    lambdas = list(lambdas)
    ds = list(ds)
    if len(ds) != len(lambdas):
        raise ValueError("need one probe count per class")
    if not 0 <= k < len(lambdas):
        raise ValueError(f"priority index {k} out of range")
    # Only rates at or above class k matter; never touch the lower ones.
    rho_k = effective_loads(lambdas[: k + 1])[k]
    tail = baseline_tail(rho_k, ds[k], eps)
    tail.params.update(
        {"lambda": lambdas[k], "rho": rho_k, "d": ds[k], "priority": k}
    )
    return tail


def fuzz_beta(b: int, d: int, tol: float = 1e-12) -> float:
    """Principal root (> 1) of ``r^(b+1) - r^b - (d-1) = 0``.

    This root controls the decay rate of the fuzzed tail.  Solved by
    bisection: the bracket below is guaranteed to contain the unique root
    beyond 1, and bisection has no derivative pathologies near it.
    """
    if b < 1:
        raise ValueError(f"fuzz must be >= 1, got {b}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")

    def f(r: float) -> float:
        return r ** (b + 1) - r**b - (d - 1)

    lo = 1.0 + 1e-9
    hi = 1.0 + (d - 1) ** (1.0 / (b + 1)) + 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _fuzz_closed_exponents(b: int, d: int, statement_form: bool):
    beta = fuzz_beta(b, d)
    coeff = b + 1 + 1.0 / (d - 1)
    # The boundary-consistent exponent uses beta^(i-b-1): both branches then
    # agree at i = b+1.  statement_form=True exposes the beta^(i-b) variant
    # for comparison; it is discontinuous at the branch point.
    shift = b if statement_form else b + 1
    i = 1
    while True:
        if i <= b + 1:
            yield float(i)
        else:
            yield coeff * beta ** (i - shift) - 1.0 / (d - 1)
        i += 1


def fuzz_tail(
    lam: float,
    d: int,
    b: int,
    eps: float = DEFAULT_EPS,
    statement_form: bool = False,
) -> TailDistribution:
    """Closed-form tail under fuzzy comparisons of width b.

    Depths up to the fuzz window keep the geometric law ``s_i = lam^i``;
    beyond it the decay exponent grows like ``beta^(i-b-1)`` with beta the
    principal root from :func:`fuzz_beta`.  The closed form approximates the
    recurrence solved by :func:`fuzz_tail_recurrence`.
    """
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if b < 1:
        raise ValueError(f"fuzz must be >= 1, got {b}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    params = {"lambda": lam, "d": d, "b": b, "priority": None}
    return _build_tail(_fuzz_closed_exponents(b, d, statement_form), lam, eps, params)


def fuzz_tail_recurrence(
    lam: float, d: int, b: int, eps: float = DEFAULT_EPS
) -> TailDistribution:
    """Independent oracle for the fuzzed tail: iterate the balance recurrence.

    In steady state ``s_i = lam * s_(i-1) * s_(i-1-b)^(d-1)`` (indices below
    zero count as 1).  With b = 0 this is the exact-information recurrence
    whose solution is the double-exponential baseline law.
    """
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if b < 0:
        raise ValueError(f"fuzz must be >= 0, got {b}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    s = [1.0]
    total = 0.0
    while len(s) <= I_MAX:
        i = len(s)
        lagged = s[i - 1 - b] if i - 1 - b >= 0 else 1.0
        si = lam * s[i - 1] * lagged ** (d - 1)
        if si < eps:
            break
        s.append(si)
        total += si
    return TailDistribution(
        s=np.array(s),
        expected_depth=total,
        empty_fraction=1.0 - lam,
        truncation_epsilon=eps,
        params={"lambda": lam, "d": d, "b": b, "priority": None, "oracle": "recurrence"},
    )


def max_depth_estimate(tail: TailDistribution, n: int) -> int:
    """Depth beyond which fewer than one of n queues is expected: min{i : n*s_i < 1}."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    for i, si in enumerate(tail.s):
        if n * si < 1.0:
            return i
    # Tail was truncated first; every stored term still holds >= 1 queue.
    return len(tail.s)
