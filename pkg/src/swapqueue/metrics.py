"""Closed-form quantities and empirical stability checks.

Lyapunov values and drifts, the admissibility margin and dispersion of the
arrival process, backlog and delay bounds per swapping-set kind, plus the
two trajectory-level verdicts: a binned conditional-drift estimate and a
bound-versus-measurement report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .core import (
    ArrivalBatch,
    RepeaterConfig,
    SetKind,
    extended_period,
    f_gamma,
    period_length,
)

if TYPE_CHECKING:  # pragma: no cover
    from .dynamics import Trajectory

__all__ = [
    "lyapunov",
    "drift",
    "normalized_arrivals",
    "normalized_arrivals_by_output",
    "beta",
    "c1",
    "z_bound",
    "delay",
    "delay_matrix",
    "outgoing_rate",
    "rate_ratio",
    "analytic_delay",
    "analytic_rate_ratio",
    "DriftBin",
    "DriftEstimate",
    "estimate_drift",
    "BoundReport",
    "bound_set_type",
    "verify_bounds",
]


def _as_matrix(values, name: str) -> np.ndarray:
    if isinstance(values, ArrivalBatch):
        values = values.b
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


def lyapunov(z) -> float:
    """Sum of squared queue lengths."""
    zm = _as_matrix(z, "z")
    if np.issubdtype(zm.dtype, np.integer):
        return float((zm.astype(np.int64) ** 2).sum())
    return float((zm.astype(np.float64) ** 2).sum())


def drift(z_before, z_after) -> float:
    """One-step change of the Lyapunov value."""
    zb = _as_matrix(z_before, "z_before")
    za = _as_matrix(z_after, "z_after")
    if zb.shape != za.shape:
        raise ValueError(f"dimension mismatch: {zb.shape} vs {za.shape}")
    return lyapunov(za) - lyapunov(zb)


def normalized_arrivals(b) -> np.ndarray:
    """Arrival counts divided by their grand total."""
    bm = _as_matrix(b, "b").astype(np.float64)
    total = bm.sum()
    if total <= 0.0:
        raise ValueError("cannot normalize: total arrivals are zero")
    return bm / total


def normalized_arrivals_by_output(b) -> np.ndarray:
    """Arrival counts divided per column by that output's total.

    Alternative normalization used when comparing demand across outputs;
    every output column must have seen at least one arrival.
    """
    bm = _as_matrix(b, "b").astype(np.float64)
    col_totals = bm.sum(axis=0)
    if np.any(col_totals <= 0.0):
        raise ValueError("cannot normalize: some output column has zero arrivals")
    return bm / col_totals[None, :]


def beta(rates) -> float:
    """Dispersion of the arrival rates, sum of rate - rate**2 over all pairs."""
    r = _as_matrix(rates, "rates").astype(np.float64)
    if np.any(r < 0.0) or np.any(r > 1.0):
        raise ValueError("rates must lie in [0, 1]")
    return float((r - r * r).sum())


def c1(rates) -> float:
    """Admissibility margin: 1 minus the largest per-source rate sum.

    Positive margin means no source asks for more than one swap per period
    on average, which is what every backlog bound requires.
    """
    r = _as_matrix(rates, "rates").astype(np.float64)
    if np.any(r < 0.0) or np.any(r > 1.0):
        raise ValueError("rates must lie in [0, 1]")
    return float(1.0 - r.sum(axis=1).max())


def z_bound(
    set_type: SetKind,
    n: int,
    losses: int = 0,
    beta: float | None = None,
    c1: float | None = None,
    f: float = 0.0,
) -> float:
    """Long-run expected backlog bound for the given swapping-set kind.

    Perfect sets pin the backlog at exactly n.  Complete sets obey
    n * beta / c1.  Non-complete sets additionally pay the noise penalty:
    (n - losses) * beta / c1 + (n - losses) * f / (2 * c1).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if set_type is SetKind.PERFECT:
        return float(n)
    if beta is None or c1 is None:
        raise ValueError(f"{set_type.value} bound needs beta and c1")
    if c1 <= 0.0:
        raise ValueError("no bound exists: admissibility margin c1 must be > 0")
    if set_type is SetKind.COMPLETE:
        return n * beta / c1
    if not 0 <= losses < n:
        raise ValueError("losses must lie in [0, n) for a non-complete bound")
    m = n - losses
    return m * beta / c1 + m * f / (2.0 * c1)


def delay(z_total: float, b_total: float) -> float:
    """Backlog over per-period arrivals, measured in swapping periods."""
    if b_total <= 0.0:
        raise ValueError("delay undefined without traffic (b_total must be > 0)")
    return z_total / b_total


def delay_matrix(z, b) -> np.ndarray:
    """Per-pair delay: each queue length over that pair's arrival count."""
    zm = _as_matrix(z, "z").astype(np.float64)
    bm = _as_matrix(b, "b").astype(np.float64)
    if zm.shape != bm.shape:
        raise ValueError(f"dimension mismatch: {zm.shape} vs {bm.shape}")
    if np.any(bm <= 0.0):
        raise ValueError("delay undefined for pairs without traffic")
    return zm / bm


def outgoing_rate(b_total: float, delay_value: float, losses: int, n: int) -> float:
    """Served entanglement rate: (1 - losses/n) * b_total / (1 + delay)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= losses <= n:
        raise ValueError("losses must lie in [0, n]")
    if delay_value < 0.0:
        raise ValueError("delay must be >= 0")
    if b_total < 0.0:
        raise ValueError("b_total must be >= 0")
    return (1.0 - losses / n) * b_total / (1.0 + delay_value)


def rate_ratio(b_total: float, outgoing: float) -> float:
    """Outgoing over incoming rate."""
    if b_total <= 0.0:
        raise ValueError("rate ratio undefined without traffic (b_total must be > 0)")
    return outgoing / b_total


def analytic_delay(
    set_type: SetKind,
    b_total: float,
    n: int,
    losses: int = 0,
    beta: float | None = None,
    c1: float | None = None,
    f: float = 0.0,
) -> float:
    """Closed-form delay curve: backlog bound spread over the incoming rate."""
    bound = z_bound(set_type, n, losses=losses, beta=beta, c1=c1, f=f)
    return delay(bound, b_total)


def analytic_rate_ratio(
    set_type: SetKind,
    b_total: float,
    n: int,
    losses: int = 0,
    beta: float | None = None,
    c1: float | None = None,
    f: float = 0.0,
) -> float:
    """Closed-form outgoing/incoming ratio along the analytic delay curve.

    Only the non-complete kind carries a loss factor; perfect and complete
    sets lose nothing by definition.
    """
    d = analytic_delay(set_type, b_total, n, losses=losses, beta=beta, c1=c1, f=f)
    loss_factor = 1.0 - losses / n if set_type is SetKind.NONCOMPLETE else 1.0
    return loss_factor / (1.0 + d)


@dataclass(frozen=True)
class DriftBin:
    """Mean conditional drift over one range of measured backlog totals."""

    z_lo: float
    z_hi: float
    mean_drift: float
    count: int


@dataclass(frozen=True)
class DriftEstimate:
    """Binned conditional-drift summary of one trajectory.

    ``epsilon_hat`` is the negated slope fitted over the highest-backlog
    bins; ``consistent`` reports whether those bins all show negative mean
    drift with a positive fitted slope, the finite-horizon signature of
    strong stability.
    """

    bins: tuple[DriftBin, ...]
    epsilon_hat: float
    consistent: bool

    def large_z_bins(self, k: int = 3) -> tuple[DriftBin, ...]:
        """The k highest-backlog bins that actually received samples."""
        populated = [b for b in self.bins if b.count > 0]
        return tuple(populated[-k:])


def estimate_drift(trajectory: "Trajectory", bins: int = 10, fit_bins: int = 3) -> DriftEstimate:
    """Bin consecutive-period drifts by the backlog they started from.

    Uses equal-width bins over the observed range of measured backlog
    totals; the sample counts over all bins add up to horizon - 1.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    z = np.asarray(trajectory.z_totals, dtype=np.float64)
    ly = np.asarray(trajectory.lyapunovs, dtype=np.float64)
    if len(z) < 2:
        raise ValueError("drift estimation needs a horizon of at least 2")
    states = z[:-1]
    drifts = ly[1:] - ly[:-1]
    lo = float(states.min())
    hi = float(states.max())
    if hi == lo:
        edges = np.array([lo, hi])
        idx = np.zeros(len(states), dtype=np.int64)
        bins = 1
    else:
        edges = np.linspace(lo, hi, bins + 1)
        idx = np.minimum(
            np.digitize(states, edges[1:-1], right=False), bins - 1
        ).astype(np.int64)
    counts = np.bincount(idx, minlength=bins)
    sums = np.bincount(idx, weights=drifts, minlength=bins)
    out = []
    for b in range(bins):
        mean = float(sums[b] / counts[b]) if counts[b] > 0 else float("nan")
        hi_edge = edges[b + 1] if bins > 1 else hi
        out.append(DriftBin(float(edges[b]), float(hi_edge), mean, int(counts[b])))
    populated = [b for b in out if b.count > 0]
    top = populated[-fit_bins:]
    centers = np.array([(b.z_lo + b.z_hi) / 2.0 for b in top])
    means = np.array([b.mean_drift for b in top])
    if len(top) >= 2 and np.ptp(centers) > 0:
        slope = float(np.polyfit(centers, means, 1)[0])
        epsilon_hat = -slope
    elif len(top) == 1 and centers[0] > 0:
        epsilon_hat = float(-means[0] / centers[0])
    else:
        epsilon_hat = 0.0
    consistent = bool(all(b.mean_drift < 0 for b in top) and epsilon_hat > 0)
    return DriftEstimate(bins=tuple(out), epsilon_hat=epsilon_hat, consistent=consistent)


@dataclass(frozen=True)
class BoundReport:
    """Analytic backlog/delay bounds next to their measured counterparts."""

    set_type: SetKind
    z_bound: float
    empirical_mean_z: float
    z_satisfied: bool
    delay_bound: float
    empirical_delay: float
    delay_satisfied: bool
    slack: float


def bound_set_type(config: RepeaterConfig) -> SetKind:
    """Which analytic bound applies to runs of this configuration.

    Noise present means non-complete.  Without noise, a deterministic
    one-arrival-per-source pattern realizes the perfect set; every other
    lossless configuration is checked against the complete-set bound.
    """
    if config.gamma > 0.0:
        return SetKind.NONCOMPLETE
    probs = config.arrival_probs
    binary = bool(np.all((probs == 0.0) | (probs == 1.0)))
    if binary and bool(np.all(probs.sum(axis=1) == 1.0)):
        return SetKind.PERFECT
    return SetKind.COMPLETE


def verify_bounds(
    trajectory: "Trajectory",
    rates: str = "config",
    slack: float = 1.0,
    burn_in: float = 0.1,
) -> BoundReport:
    """Compare a run's long-run averages against the analytic bounds.

    ``rates`` selects the arrival-rate matrix the bounds are evaluated at:
    "config" uses the configured probabilities (the process ground truth),
    "empirical" the realized per-period arrival frequencies.  The first
    ``burn_in`` fraction of periods is discarded before averaging; the
    empirical delay is the ratio of the surviving means.
    """
    if rates == "config":
        rate_matrix = trajectory.config.arrival_probs
    elif rates == "empirical":
        rate_matrix = trajectory.arrival_rates
    else:
        raise ValueError("rates must be 'config' or 'empirical'")
    if not 0.0 <= burn_in < 1.0:
        raise ValueError("burn_in must lie in [0, 1)")
    cfg = trajectory.config
    n = cfg.n_connections
    kind = bound_set_type(cfg)
    losses = cfg.expected_losses()
    f = f_gamma(
        cfg.gamma,
        extended_period(period_length(cfg.cycles_per_period, cfg.cycle_time), cfg.h),
        n,
    )
    bound = z_bound(kind, n, losses=losses, beta=beta(rate_matrix), c1=c1(rate_matrix), f=f)
    start = int(burn_in * len(trajectory.z_totals))
    mean_z = float(np.mean(trajectory.z_totals[start:]))
    mean_b = float(np.mean(trajectory.b_totals[start:]))
    rate_total = float(np.asarray(rate_matrix).sum())
    if rate_total <= 0.0 or mean_b <= 0.0:
        raise ValueError("bound verification needs nonzero arrival traffic")
    delay_bound_value = bound / rate_total
    empirical_delay = mean_z / mean_b
    return BoundReport(
        set_type=kind,
        z_bound=bound,
        empirical_mean_z=mean_z,
        z_satisfied=bool(mean_z <= bound * slack),
        delay_bound=delay_bound_value,
        empirical_delay=empirical_delay,
        delay_satisfied=bool(empirical_delay <= delay_bound_value * slack),
        slack=float(slack),
    )
