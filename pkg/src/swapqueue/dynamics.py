"""Period-by-period evolution of the repeater queue state.

The event order inside one period is fixed: arrivals land and are
accumulated, noise masks a random subset of output columns, the policy
builds a schedule restricted to the surviving outputs, the schedule is
served with clamping at zero, and metrics are recorded.  Backlog metrics
describe the state right after arrivals, before service.

Runs are deterministic functions of (config, seed).  Four independent
random streams (arrivals, masks, losses, policy choices) are derived from
the root seed, so changing e.g. the policy never perturbs the arrivals.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import scheduler
from .core import (
    ArrivalBatch,
    LossMode,
    PeriodMetrics,
    RepeaterConfig,
    binomial_loss_cdf,
)

__all__ = [
    "Policy",
    "RandomStreams",
    "SimState",
    "Trajectory",
    "sample_arrivals",
    "accumulate",
    "apply_schedule",
    "init_state",
    "step",
    "run",
]

# Auto-dispatch thresholds: the compiled loop scans the full permutation
# table, so it only pays off for small n and long horizons.
_KERNEL_MAX_N = 8
_KERNEL_AUTO_MAX_N = 7
_KERNEL_MIN_HORIZON = 512


class Policy(enum.Enum):
    MAXWEIGHT = "maxweight"
    RANDOM = "random"
    DELAYED = "delayed"


_POLICY_CODES = {Policy.MAXWEIGHT: 0, Policy.RANDOM: 1, Policy.DELAYED: 2}


@dataclass
class RandomStreams:
    """Independent generators, one per source of randomness."""

    arrivals: np.random.Generator
    mask: np.random.Generator
    loss: np.random.Generator
    policy: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RandomStreams":
        children = np.random.SeedSequence(seed).spawn(4)
        return cls(*(np.random.default_rng(c) for c in children))


def sample_arrivals(rng: np.random.Generator, probs) -> ArrivalBatch:
    """Independent Bernoulli arrival draw for every (source, output) pair."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"probs must be a square matrix, got shape {p.shape}")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("probs entries must lie in [0, 1]")
    u = rng.random(p.shape)
    return ArrivalBatch((u < p).astype(np.int64))


def accumulate(z, b) -> np.ndarray:
    """Queue state with a batch of arrivals added entrywise."""
    bm = b.b if isinstance(b, ArrivalBatch) else np.asarray(b)
    zm = np.asarray(z)
    if zm.shape != bm.shape:
        raise ValueError(f"dimension mismatch: z {zm.shape} vs b {bm.shape}")
    return (zm + bm).astype(np.int64)


def apply_schedule(z, s) -> tuple[np.ndarray, int]:
    """Serve a schedule against the state, clamping at zero.

    Returns the new state and the number of swaps actually performed; a
    scheduled swap on an empty queue does nothing.  The schedule must
    satisfy the one-swap-per-row/column constraint.
    """
    zm = np.asarray(z)
    sm = np.asarray(s)
    if zm.shape != sm.shape:
        raise ValueError(f"dimension mismatch: z {zm.shape} vs schedule {sm.shape}")
    if not scheduler.is_sub_permutation(sm):
        raise ValueError("schedule violates the one-swap-per-row/column constraint")
    swaps = int(((sm == 1) & (zm >= 1)).sum())
    return np.maximum(zm - sm, 0).astype(np.int64), swaps


@dataclass
class SimState:
    """Mutable state threaded through repeated ``step`` calls.

    ``history`` collects the per-period max-weight schedules while the
    delayed policy runs; the other policies leave it empty.
    """

    config: RepeaterConfig
    z: np.ndarray
    period: int
    streams: RandomStreams
    history: list[np.ndarray]
    prev_lyapunov: float


def _check_initial(initial_z, n: int) -> np.ndarray:
    z = np.asarray(initial_z)
    if z.shape != (n, n):
        raise ValueError(f"initial state must have shape ({n}, {n}), got {z.shape}")
    if np.any(z < 0):
        raise ValueError("initial state entries must be non-negative")
    zi = z.astype(np.int64)
    if np.any(zi != z):
        raise ValueError("initial state entries must be integers")
    return zi


def _check_delay(delay_periods) -> int:
    d = int(delay_periods)
    if d < 0:
        raise ValueError("delay_periods must be >= 0")
    return d


def init_state(config: RepeaterConfig, initial_z=None) -> SimState:
    n = config.n_connections
    z = np.zeros((n, n), dtype=np.int64) if initial_z is None else _check_initial(initial_z, n)
    lyap0 = float((z.astype(np.int64) ** 2).sum())
    return SimState(
        config=config,
        z=z,
        period=0,
        streams=RandomStreams.from_seed(config.seed),
        history=[],
        prev_lyapunov=lyap0,
    )


def _apply_period(z, bits, lose, masked_cols, policy, input_order, history, d, t):
    """One period of dynamics, mutating z in place.

    Returns (z_total, lyapunov, weight, swaps) measured per the event
    order documented at module level.
    """
    np.add(z, bits, out=z)
    z_total = int(z.sum())
    lyap = int((z * z).sum())
    n = z.shape[0]
    masked = np.zeros(n, dtype=bool)
    masked[masked_cols] = True
    avail = np.flatnonzero(~masked)
    if policy is Policy.MAXWEIGHT:
        s = scheduler.masked_max_weight(z, avail)
    elif policy is Policy.RANDOM:
        s = np.zeros((n, n), dtype=np.int64)
        for j, k in enumerate(avail):
            s[input_order[j], k] = 1
    else:
        zeta = scheduler.masked_max_weight(z, avail)
        history.append(zeta)
        if d == 0:
            s = zeta
        elif t >= d:
            # a stale schedule may point at outputs masked this period
            s = history[t - d].copy()
            s[:, masked] = 0
        else:
            s = np.zeros((n, n), dtype=np.int64)
    w = int((s * z).sum())
    served, swaps = apply_schedule(z, s)
    z[...] = served
    return z_total, lyap, w, swaps


def step(
    state: SimState, policy: Policy = Policy.MAXWEIGHT, delay_periods: int | None = None
) -> tuple[SimState, PeriodMetrics]:
    """Advance the state by one period and return its metrics.

    The state is evolved in place and returned for chaining.  Stream
    consumption per period is fixed (n**2 arrival uniforms, n mask
    uniforms, one loss uniform in binomial mode, n policy uniforms under
    the random policy), so stepping matches ``run`` draw for draw.
    """
    policy = Policy(policy)
    cfg = state.config
    n = cfg.n_connections
    d = cfg.delay_periods() if delay_periods is None else _check_delay(delay_periods)
    batch = sample_arrivals(state.streams.arrivals, cfg.arrival_probs)
    mask_order = np.argsort(state.streams.mask.random(n), kind="stable")
    if cfg.loss_mode is LossMode.BINOMIAL:
        u = state.streams.loss.random()
        cdf = binomial_loss_cdf(n, cfg.gamma)
        lose = min(int(np.searchsorted(cdf, u, side="right")), n)
    else:
        lose = cfg.expected_losses()
    input_order = None
    if policy is Policy.RANDOM:
        input_order = np.argsort(state.streams.policy.random(n), kind="stable")
    z_total, lyap, w, swaps = _apply_period(
        state.z,
        batch.b,
        lose,
        mask_order[:lose],
        policy,
        input_order,
        state.history,
        d,
        state.period,
    )
    b_total = batch.total
    delay_value = z_total / b_total if b_total > 0 else 0.0
    ratio = (1.0 - lose / n) / (1.0 + delay_value)
    metrics = PeriodMetrics(
        period_index=state.period,
        weight=float(w),
        lyapunov=float(lyap),
        drift=float(lyap) - state.prev_lyapunov,
        delay=delay_value,
        incoming_total=b_total,
        outgoing_rate=ratio * b_total,
        rate_ratio=ratio,
        losses=int(lose),
        z_total=int(z_total),
        swaps=int(swaps),
    )
    state.prev_lyapunov = float(lyap)
    state.period += 1
    return state, metrics


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Columnar record of one run.

    Arrays are aligned per period and read-only; ``records`` materializes
    the same data as one ``PeriodMetrics`` object per period on demand.
    """

    config: RepeaterConfig
    policy: Policy
    z_totals: np.ndarray
    lyapunovs: np.ndarray
    drifts: np.ndarray
    weights: np.ndarray
    swaps: np.ndarray
    b_totals: np.ndarray
    losses: np.ndarray
    delays: np.ndarray
    outgoing_rates: np.ndarray
    rate_ratios: np.ndarray
    arrival_totals: np.ndarray
    initial_z: np.ndarray
    final_z: np.ndarray

    @property
    def horizon(self) -> int:
        return int(len(self.z_totals))

    @property
    def arrival_rates(self) -> np.ndarray:
        """Realized per-pair arrival frequency over the whole run."""
        return self.arrival_totals / self.horizon

    @cached_property
    def records(self) -> list[PeriodMetrics]:
        out = []
        for t in range(self.horizon):
            out.append(
                PeriodMetrics(
                    period_index=t,
                    weight=float(self.weights[t]),
                    lyapunov=float(self.lyapunovs[t]),
                    drift=float(self.drifts[t]),
                    delay=float(self.delays[t]),
                    incoming_total=int(self.b_totals[t]),
                    outgoing_rate=float(self.outgoing_rates[t]),
                    rate_ratio=float(self.rate_ratios[t]),
                    losses=int(self.losses[t]),
                    z_total=int(self.z_totals[t]),
                    swaps=int(self.swaps[t]),
                )
            )
        return out


@lru_cache(maxsize=16)
def _permutation_table(n: int) -> np.ndarray:
    table = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    table.flags.writeable = False
    return table


def _pick_kernel(impl: str | None, n: int, horizon: int) -> bool:
    if impl == "python":
        return False
    if impl == "kernel":
        if n > _KERNEL_MAX_N:
            raise ValueError(
                f"compiled loop supports n <= {_KERNEL_MAX_N} (permutation table), got {n}"
            )
        return True
    if impl is not None:
        raise ValueError("impl must be None, 'python' or 'kernel'")
    return n <= _KERNEL_AUTO_MAX_N and horizon >= _KERNEL_MIN_HORIZON


def _python_run(z, bits, losses, mask_order, policy, policy_order, d, z_totals, lyaps, weights, swaps):
    horizon = bits.shape[0]
    history: list[np.ndarray] = []
    for t in range(horizon):
        lose = int(losses[t])
        order = policy_order[t] if policy is Policy.RANDOM else None
        zt, ly, w, sw = _apply_period(
            z, bits[t].astype(np.int64), lose, mask_order[t, :lose], policy, order, history, d, t
        )
        z_totals[t] = zt
        lyaps[t] = ly
        weights[t] = w
        swaps[t] = sw


def run(
    config: RepeaterConfig,
    policy: Policy = Policy.MAXWEIGHT,
    *,
    initial_z=None,
    delay_periods: int | None = None,
    impl: str | None = None,
) -> Trajectory:
    """Simulate the configured horizon and return the full trajectory.

    All randomness is pre-drawn in bulk from the per-purpose streams, then
    consumed by either the compiled loop or the plain Python loop; both
    produce identical trajectories for the same config and seed.  ``impl``
    forces "python" or "kernel", mainly for tests; the default picks the
    compiled loop for small n and long horizons.
    """
    policy = Policy(policy)
    n = config.n_connections
    horizon = config.horizon
    d = config.delay_periods() if delay_periods is None else _check_delay(delay_periods)
    z0 = np.zeros((n, n), dtype=np.int64) if initial_z is None else _check_initial(initial_z, n)
    use_kernel = _pick_kernel(impl, n, horizon)

    streams = RandomStreams.from_seed(config.seed)
    bits = (streams.arrivals.random((horizon, n, n)) < config.arrival_probs).astype(np.int8)
    mask_order = np.argsort(
        streams.mask.random((horizon, n)), axis=1, kind="stable"
    ).astype(np.int64)
    if config.loss_mode is LossMode.BINOMIAL:
        cdf = binomial_loss_cdf(n, config.gamma)
        losses = np.minimum(
            np.searchsorted(cdf, streams.loss.random(horizon), side="right"), n
        ).astype(np.int64)
    else:
        losses = np.full(horizon, config.expected_losses(), dtype=np.int64)
    if policy is Policy.RANDOM:
        policy_order = np.argsort(
            streams.policy.random((horizon, n)), axis=1, kind="stable"
        ).astype(np.int64)
    else:
        policy_order = np.zeros((1, n), dtype=np.int64)

    z = z0.copy()
    z_totals = np.empty(horizon, dtype=np.int64)
    lyaps = np.empty(horizon, dtype=np.int64)
    weights = np.empty(horizon, dtype=np.int64)
    swap_counts = np.empty(horizon, dtype=np.int64)
    if use_kernel:
        from ._kernel import kernel_simulate

        kernel_simulate()(
            z,
            bits,
            losses,
            mask_order,
            _POLICY_CODES[policy],
            policy_order,
            d,
            _permutation_table(n),
            z_totals,
            lyaps,
            weights,
            swap_counts,
        )
    else:
        _python_run(
            z, bits, losses, mask_order, policy, policy_order, d,
            z_totals, lyaps, weights, swap_counts,
        )

    b_totals = bits.sum(axis=(1, 2), dtype=np.int64)
    lyap_f = lyaps.astype(np.float64)
    drifts = np.empty(horizon, dtype=np.float64)
    drifts[0] = lyap_f[0] - float((z0.astype(np.int64) ** 2).sum())
    if horizon > 1:
        drifts[1:] = lyap_f[1:] - lyap_f[:-1]
    delays = np.divide(
        z_totals.astype(np.float64),
        b_totals.astype(np.float64),
        out=np.zeros(horizon, dtype=np.float64),
        where=b_totals > 0,
    )
    ratios = (1.0 - losses / n) / (1.0 + delays)
    outgoing = ratios * b_totals
    arrays = dict(
        z_totals=z_totals,
        lyapunovs=lyap_f,
        drifts=drifts,
        weights=weights.astype(np.float64),
        swaps=swap_counts,
        b_totals=b_totals,
        losses=losses,
        delays=delays,
        outgoing_rates=outgoing,
        rate_ratios=ratios,
        arrival_totals=bits.sum(axis=0, dtype=np.int64),
        initial_z=z0,
        final_z=z,
    )
    for arr in arrays.values():
        arr.flags.writeable = False
    return Trajectory(config=config, policy=policy, **arrays)
