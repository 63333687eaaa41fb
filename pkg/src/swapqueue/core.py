"""Domain types, period arithmetic and loss mapping for the swapping-queue model.

The model is a slotted-time, input-queued system: a repeater holds a square
matrix of stored incoming densities, one queue per (source, target output)
pair, and performs at most one swap per source and per output each period.
Everything downstream (schedulers, dynamics, closed-form bounds) builds on
the types defined here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "LossMode",
    "SetKind",
    "RepeaterConfig",
    "CoincidenceMatrix",
    "Schedule",
    "ArrivalBatch",
    "SwappingSetState",
    "PeriodMetrics",
    "period_length",
    "extended_period",
    "f_gamma",
    "losses_for_period",
    "binomial_loss_cdf",
    "classify_set",
    "swapping_set_state",
]

# Queue state and schedules are plain integer arrays; the aliases document
# intent, not a distinct runtime type.
CoincidenceMatrix = NDArray[np.int64]
Schedule = NDArray[np.int64]


class LossMode(enum.Enum):
    """How the noise coefficient maps to a per-period loss count."""

    DETERMINISTIC = "deterministic"
    BINOMIAL = "binomial"


class SetKind(enum.Enum):
    """Classification of the per-period swapping set."""

    PERFECT = "perfect"
    COMPLETE = "complete"
    NONCOMPLETE = "noncomplete"


@dataclass(frozen=True, eq=False)
class RepeaterConfig:
    """Static parameters of one repeater simulation.

    ``arrival_probs[i][k]`` is the probability that source ``i`` requests
    output ``k`` during a period (independent Bernoulli draws).  Queue
    dynamics stay integer valued; only period lengths are real numbers.

    Attributes:
        n_connections: number of sources, equal to the number of outputs.
        arrival_probs: square matrix of per-pair arrival probabilities.
        gamma: noise coefficient in [0, 1] driving per-period losses.
        h: non-negative period extension factor.
        cycle_time: oscillator cycle length in seconds.
        cycles_per_period: cycles making up one swapping period.
        horizon: number of periods a run simulates.
        seed: 64-bit unsigned root seed for all random streams.
        loss_mode: deterministic rounding or binomial sampling of losses.
    """

    n_connections: int
    arrival_probs: np.ndarray
    gamma: float = 0.0
    h: float = 0.2
    cycle_time: float = 1.0
    cycles_per_period: int = 1
    horizon: int = 10_000
    seed: int = 42
    loss_mode: LossMode = LossMode.DETERMINISTIC

    def __post_init__(self) -> None:
        n = self.n_connections
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError("n_connections must be an integer >= 1")
        probs = np.array(self.arrival_probs, dtype=np.float64)
        if probs.shape != (n, n):
            raise ValueError(
                f"arrival_probs must have shape ({n}, {n}), got {probs.shape}"
            )
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ValueError("arrival_probs entries must lie in [0, 1]")
        probs.flags.writeable = False
        object.__setattr__(self, "arrival_probs", probs)
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.h < 0.0:
            raise ValueError("h must be >= 0")
        if self.cycle_time <= 0.0:
            raise ValueError("cycle_time must be > 0")
        if self.cycles_per_period < 1:
            raise ValueError("cycles_per_period must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not isinstance(self.loss_mode, LossMode):
            raise ValueError("loss_mode must be a LossMode value")

    @classmethod
    def uniform(
        cls, n_connections: int, arrival_prob: float, **kwargs
    ) -> "RepeaterConfig":
        """Config with the same arrival probability for every (source, output) pair."""
        probs = np.full((n_connections, n_connections), float(arrival_prob))
        return cls(n_connections=n_connections, arrival_probs=probs, **kwargs)

    def period_length(self) -> float:
        return period_length(self.cycles_per_period, self.cycle_time)

    def extended_period(self) -> float:
        return extended_period(self.period_length(), self.h)

    def f_gamma(self) -> float:
        return f_gamma(self.gamma, self.extended_period(), self.n_connections)

    def expected_losses(self) -> int:
        """Deterministic per-period loss count, round-half-up of gamma * N."""
        return _deterministic_losses(self.gamma, self.n_connections)

    def delay_periods(self) -> int:
        """Whole periods covering one extended period, ceil(1 + h).

        The extended period is (1 + h) plain periods; state only changes at
        period boundaries, so the delayed policy looks back this many periods.
        """
        return math.ceil(1.0 + self.h)


@dataclass(frozen=True, eq=False)
class ArrivalBatch:
    """Per-period arrival counts, one entry per (source, output) pair."""

    b: np.ndarray

    def __post_init__(self) -> None:
        b = np.asarray(self.b)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("arrival counts must form a square matrix")
        if np.any(b < 0):
            raise ValueError("arrival counts must be non-negative")
        object.__setattr__(self, "b", b.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.b.sum())


@dataclass(frozen=True)
class SwappingSetState:
    """Cardinality bookkeeping for one period's swapping set.

    ``output_cardinality`` is the number of outputs that survived the
    period's losses; it always equals ``n - losses`` for the repeater size
    ``n`` the state was built from.
    """

    input_cardinality: int
    output_cardinality: int
    losses: int
    classification: SetKind

    def __post_init__(self) -> None:
        if self.input_cardinality < 0:
            raise ValueError("input_cardinality must be >= 0")
        if self.output_cardinality < 0:
            raise ValueError("output_cardinality must be >= 0")
        if self.losses < 0:
            raise ValueError("losses must be >= 0")


@dataclass(frozen=True)
class PeriodMetrics:
    """Everything recorded about a single period.

    ``z_total`` and ``lyapunov`` describe the queue state right after the
    period's arrivals landed and before its swaps were served; ``drift`` is
    the change of the Lyapunov value between consecutive measured states.
    ``swaps`` counts schedule entries that actually served a stored density.
    """

    period_index: int
    weight: float
    lyapunov: float
    drift: float
    delay: float
    incoming_total: int
    outgoing_rate: float
    rate_ratio: float
    losses: int
    z_total: int
    swaps: int


def period_length(cycles_per_period: int, cycle_time: float) -> float:
    """Length of one swapping period in seconds."""
    if cycles_per_period < 1:
        raise ValueError("cycles_per_period must be >= 1")
    if cycle_time <= 0.0:
        raise ValueError("cycle_time must be > 0")
    return cycles_per_period * cycle_time


def extended_period(pi_s: float, h: float) -> float:
    """Period stretched by the extension factor: (1 + h) * pi_s."""
    if pi_s <= 0.0:
        raise ValueError("pi_s must be > 0")
    if h < 0.0:
        raise ValueError("h must be >= 0")
    return (1.0 + h) * pi_s


def f_gamma(gamma: float, pi_s_star: float, n: int) -> float:
    """Additive queue penalty caused by noise.

    Zero without noise; with any noise present the penalty is a constant
    2 * pi_s_star * n, independent of the magnitude of gamma.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if pi_s_star <= 0.0:
        raise ValueError("pi_s_star must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if gamma == 0.0:
        return 0.0
    return 2.0 * pi_s_star * n


def _deterministic_losses(gamma: float, n: int) -> int:
    # round half up, clamped to [0, n]
    count = int(math.floor(gamma * n + 0.5))
    return max(0, min(count, n))


@lru_cache(maxsize=None)
def binomial_loss_cdf(n: int, gamma: float) -> np.ndarray:
    """CDF of Binomial(n, gamma) over 0..n, used for inverse-CDF sampling.

    Cached and read-only: dynamics draws one uniform per period and inverts
    this table, which keeps random-stream consumption independent of gamma.
    """
    pmf = [math.comb(n, k) * gamma**k * (1.0 - gamma) ** (n - k) for k in range(n + 1)]
    cdf = np.cumsum(np.asarray(pmf, dtype=np.float64))
    cdf.flags.writeable = False
    return cdf


def losses_for_period(
    gamma: float,
    n: int,
    mode: LossMode = LossMode.DETERMINISTIC,
    rng: np.random.Generator | None = None,
) -> int:
    """Per-period loss count derived from the noise coefficient.

    Deterministic mode rounds gamma * n half-up; binomial mode draws from
    Binomial(n, gamma) by inverting the CDF with a single uniform.  Either
    way the count is 0 exactly when gamma is 0.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode is LossMode.DETERMINISTIC:
        return _deterministic_losses(gamma, n)
    if rng is None:
        raise ValueError("binomial loss mode needs a random generator")
    u = rng.random()
    idx = int(np.searchsorted(binomial_loss_cdf(n, gamma), u, side="right"))
    return min(idx, n)


def classify_set(q: int, n: int, losses: int) -> SetKind:
    """Classify a period's swapping set from its cardinalities.

    Any loss makes the set non-complete.  Without losses the set is perfect
    when exactly ``n`` incoming densities are stored and complete when more
    are; an underfilled lossless period also counts as non-complete because
    neither cardinality condition holds.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if q < 0:
        raise ValueError("q must be >= 0")
    if not 0 <= losses <= n:
        raise ValueError("losses must lie in [0, n]")
    if losses > 0:
        return SetKind.NONCOMPLETE
    if q == n:
        return SetKind.PERFECT
    if q > n:
        return SetKind.COMPLETE
    return SetKind.NONCOMPLETE


def swapping_set_state(q: int, n: int, losses: int) -> SwappingSetState:
    """Bundle the cardinalities and their classification into one record."""
    kind = classify_set(q, n, losses)
    return SwappingSetState(
        input_cardinality=int(q),
        output_cardinality=int(n - losses),
        losses=int(losses),
        classification=kind,
    )
