"""Slotted-time simulator and analytic toolkit for entanglement swapping.

A repeater is modeled as an input-queued system: stored incoming densities
wait in per-(source, output) queues, a scheduling policy picks at most one
swap per source and output each period, and noise removes a random subset
of outputs.  The package provides the exact max-weight scheduler with
baselines, the queue dynamics, closed-form backlog/delay/rate bounds, and
a CLI harness that sweeps scenarios into CSV files.
"""

from .core import (
    ArrivalBatch,
    LossMode,
    PeriodMetrics,
    RepeaterConfig,
    SetKind,
    SwappingSetState,
    classify_set,
    extended_period,
    f_gamma,
    losses_for_period,
    period_length,
    swapping_set_state,
)
from .dynamics import (
    Policy,
    SimState,
    Trajectory,
    accumulate,
    apply_schedule,
    init_state,
    run,
    sample_arrivals,
    step,
)
from .metrics import (
    BoundReport,
    DriftBin,
    DriftEstimate,
    analytic_delay,
    analytic_rate_ratio,
    beta,
    bound_set_type,
    c1,
    delay,
    drift,
    estimate_drift,
    lyapunov,
    outgoing_rate,
    rate_ratio,
    verify_bounds,
    z_bound,
)
from .scheduler import (
    brute_force_max_weight,
    delayed_schedule,
    masked_max_weight,
    max_weight_schedule,
    random_schedule,
    schedule_norm,
    weight,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalBatch",
    "BoundReport",
    "DriftBin",
    "DriftEstimate",
    "LossMode",
    "PeriodMetrics",
    "Policy",
    "RepeaterConfig",
    "SetKind",
    "SimState",
    "SwappingSetState",
    "Trajectory",
    "accumulate",
    "analytic_delay",
    "analytic_rate_ratio",
    "apply_schedule",
    "beta",
    "bound_set_type",
    "brute_force_max_weight",
    "c1",
    "classify_set",
    "delay",
    "delayed_schedule",
    "drift",
    "estimate_drift",
    "extended_period",
    "f_gamma",
    "init_state",
    "losses_for_period",
    "lyapunov",
    "masked_max_weight",
    "max_weight_schedule",
    "outgoing_rate",
    "period_length",
    "random_schedule",
    "rate_ratio",
    "run",
    "sample_arrivals",
    "schedule_norm",
    "step",
    "swapping_set_state",
    "verify_bounds",
    "weight",
    "z_bound",
]
