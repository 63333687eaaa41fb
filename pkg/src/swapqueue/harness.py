"""CLI harness: config parsing, named scenarios, CSV emission.

Scenarios fall in two groups.  The analytic sweeps (fig3a, fig3b, fig4a,
fig4b) evaluate closed-form quantities over fixed grids and never touch
the simulator, so they are exact and instant.  The Monte Carlo scenarios
(stability, compare) run seeded replications of the dynamics; replication
j uses seed base_seed + j.  Identical invocations produce byte-identical
CSV files.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import csv
import enum

import numpy as np

from . import metrics
from .core import LossMode, RepeaterConfig, SetKind, extended_period, f_gamma
from .dynamics import Policy, run

__all__ = [
    "ConfigError",
    "RunOptions",
    "Scenario",
    "ScenarioSpec",
    "parse_config",
    "run_scenario",
    "emit_csv",
    "read_csv",
    "main",
]


class ConfigError(Exception):
    """Invalid config file or CLI parameters."""


@dataclass(frozen=True)
class RunOptions:
    """Simulation options that sit outside RepeaterConfig."""

    policy: Policy = Policy.MAXWEIGHT
    delay_periods: int | None = None


class Scenario(enum.Enum):
    FIG3A = "fig3a"
    FIG3B = "fig3b"
    FIG4A = "fig4a"
    FIG4B = "fig4b"
    STABILITY = "stability"
    COMPARE = "compare"


_MC_SCENARIOS = (Scenario.STABILITY, Scenario.COMPARE)
_DEFAULT_REPLICATIONS = {Scenario.STABILITY: 20, Scenario.COMPARE: 20}


@dataclass(frozen=True)
class ScenarioSpec:
    """A named scenario plus its sweep grids and output location.

    Grid fields left as None take the documented defaults; overriding them
    supports scaled-down runs.
    """

    name: Scenario
    out_path: str
    replications: int = 1
    pi_s_values: tuple[float, ...] | None = None
    h_values: tuple[float, ...] | None = None
    n_values: tuple[int, ...] | None = None
    b_values: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for field in ("pi_s_values", "h_values", "n_values", "b_values"):
            grid = getattr(self, field)
            if grid is not None and len(grid) == 0:
                raise ValueError(f"{field} must be non-empty when given")


def _canon(x: float) -> float:
    """Round to 12 significant digits, the CSV emission precision.

    Applying this at row-construction time makes emit/parse a strict
    round trip.
    """
    return float(f"{float(x):.12g}")


# Default sweep grids.
_PI_S_GRID = tuple(_canon(1.0 + 0.25 * j) for j in range(37))
_H_GRID = tuple(_canon(0.025 * j) for j in range(41))
_N_GRID = tuple(range(1, 11))
_B_GRID = tuple(_canon(10.0 ** (j / 25.0)) for j in range(201))

# Fixed operating point behind the analytic delay/rate curves: five
# connections, one lost output, dispersion 0.78 (0.64 once noise thins the
# arrivals), admissibility margin 0.7 and noise penalty 12.
_CURVE_N = 5
_CURVE_LOSSES = 1
_CURVE_BETA = {
    SetKind.PERFECT: 0.78,
    SetKind.COMPLETE: 0.78,
    SetKind.NONCOMPLETE: 0.64,
}
_CURVE_C1 = 0.7
_CURVE_F = 12.0
_CURVE_KINDS = (SetKind.PERFECT, SetKind.COMPLETE, SetKind.NONCOMPLETE)


def _rows_fig3a(spec: ScenarioSpec) -> list[dict]:
    pi_grid = spec.pi_s_values or _PI_S_GRID
    h_grid = spec.h_values or _H_GRID
    rows = []
    for pi_s in pi_grid:
        for h in h_grid:
            rows.append(
                {"pi_s": pi_s, "h": h, "pi_s_star": _canon(extended_period(pi_s, h))}
            )
    return rows


def _rows_fig3b(spec: ScenarioSpec) -> list[dict]:
    h_grid = spec.h_values or _H_GRID
    n_grid = spec.n_values or _N_GRID
    rows = []
    for h in h_grid:
        for n in n_grid:
            # the noisy branch of the penalty; gamma's magnitude is irrelevant
            value = f_gamma(1.0, extended_period(1.0, h), n)
            rows.append({"h": h, "n": int(n), "f_gamma": _canon(value)})
    return rows


def _curve_value(kind: SetKind, b_total: float, what: str) -> float:
    kwargs = dict(
        n=_CURVE_N,
        losses=_CURVE_LOSSES,
        beta=_CURVE_BETA[kind],
        c1=_CURVE_C1,
        f=_CURVE_F,
    )
    if what == "delay":
        return metrics.analytic_delay(kind, b_total, **kwargs)
    return metrics.analytic_rate_ratio(kind, b_total, **kwargs)


def _rows_fig4(spec: ScenarioSpec, what: str) -> list[dict]:
    b_grid = spec.b_values or _B_GRID
    rows = []
    for b in b_grid:
        for kind in _CURVE_KINDS:
            rows.append(
                {
                    "b_total": b,
                    "set_type": kind.value,
                    what: _canon(_curve_value(kind, b, what)),
                }
            )
    return rows


_STABILITY_COLUMNS = [
    "row_type",
    "replication",
    "period",
    "z_total",
    "lyapunov",
    "drift",
    "weight",
    "b_total",
    "losses",
    "swaps",
    "bin_lo",
    "bin_hi",
    "bin_mean_drift",
    "bin_count",
    "set_type",
    "z_bound",
    "mean_z",
    "z_satisfied",
    "delay_bound",
    "mean_delay",
    "delay_satisfied",
    "epsilon_hat",
    "drift_consistent",
]


def _stability_row(**values) -> dict:
    row = {column: "" for column in _STABILITY_COLUMNS}
    row.update(values)
    return row


def _rows_stability(spec: ScenarioSpec, config: RepeaterConfig, options: RunOptions) -> list[dict]:
    rows = []
    for rep in range(spec.replications):
        cfg = dataclasses.replace(config, seed=config.seed + rep)
        traj = run(cfg, options.policy, delay_periods=options.delay_periods)
        stride = max(1, cfg.horizon // 1000)
        for t in range(0, cfg.horizon, stride):
            rows.append(
                _stability_row(
                    row_type="period",
                    replication=rep,
                    period=t,
                    z_total=int(traj.z_totals[t]),
                    lyapunov=_canon(traj.lyapunovs[t]),
                    drift=_canon(traj.drifts[t]),
                    weight=_canon(traj.weights[t]),
                    b_total=int(traj.b_totals[t]),
                    losses=int(traj.losses[t]),
                    swaps=int(traj.swaps[t]),
                )
            )
        estimate = metrics.estimate_drift(traj)
        for drift_bin in estimate.bins:
            rows.append(
                _stability_row(
                    row_type="drift_bin",
                    replication=rep,
                    bin_lo=_canon(drift_bin.z_lo),
                    bin_hi=_canon(drift_bin.z_hi),
                    bin_mean_drift=""
                    if math.isnan(drift_bin.mean_drift)
                    else _canon(drift_bin.mean_drift),
                    bin_count=drift_bin.count,
                )
            )
        report = metrics.verify_bounds(traj)
        rows.append(
            _stability_row(
                row_type="summary",
                replication=rep,
                set_type=report.set_type.value,
                z_bound=_canon(report.z_bound),
                mean_z=_canon(report.empirical_mean_z),
                z_satisfied=report.z_satisfied,
                delay_bound=_canon(report.delay_bound),
                mean_delay=_canon(report.empirical_delay),
                delay_satisfied=report.delay_satisfied,
                epsilon_hat=_canon(estimate.epsilon_hat),
                drift_consistent=estimate.consistent,
            )
        )
    return rows


def _rows_compare(spec: ScenarioSpec, config: RepeaterConfig, options: RunOptions) -> list[dict]:
    rows = []
    for rep in range(spec.replications):
        for policy in (Policy.MAXWEIGHT, Policy.RANDOM, Policy.DELAYED):
            cfg = dataclasses.replace(config, seed=config.seed + rep)
            traj = run(cfg, policy, delay_periods=options.delay_periods)
            burn = traj.horizon // 10
            rows.append(
                {
                    "replication": rep,
                    "policy": policy.value,
                    "mean_z_total": _canon(float(np.mean(traj.z_totals[burn:]))),
                }
            )
    return rows


def run_scenario(
    spec: ScenarioSpec, config: RepeaterConfig, options: RunOptions | None = None
) -> list[dict]:
    """Produce the scenario's CSV rows (dicts sharing one schema, in order)."""
    options = options or RunOptions()
    if spec.name is Scenario.FIG3A:
        return _rows_fig3a(spec)
    if spec.name is Scenario.FIG3B:
        return _rows_fig3b(spec)
    if spec.name is Scenario.FIG4A:
        return _rows_fig4(spec, "delay")
    if spec.name is Scenario.FIG4B:
        return _rows_fig4(spec, "ratio")
    if spec.name is Scenario.STABILITY:
        return _rows_stability(spec, config, options)
    if spec.name is Scenario.COMPARE:
        return _rows_compare(spec, config, options)
    raise ConfigError(f"unknown scenario '{spec.name}'")


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return f"{float(value):.12g}"
    return str(value)


def emit_csv(rows: list[dict], path, columns: list[str] | None = None) -> None:
    """Write rows as CSV: header first, 12 significant digits, LF endings."""
    if columns is None:
        if not rows:
            raise ValueError("cannot emit an empty row set without explicit columns")
        columns = list(rows[0].keys())
    for index, row in enumerate(rows):
        if list(row.keys()) != columns:
            raise ValueError(f"row {index} does not match the schema {columns}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in columns])


def _parse_cell(text: str):
    if text == "":
        return ""
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path) -> list[dict]:
    """Parse a harness CSV back into typed row dicts."""
    with open(path, newline="", encoding="utf-8") as fh:
        raw = list(csv.reader(fh))
    if not raw:
        raise ValueError(f"{path}: empty CSV")
    header = raw[0]
    rows = []
    for lineno, record in enumerate(raw[1:], start=2):
        if len(record) != len(header):
            raise ValueError(f"{path}: line {lineno} has {len(record)} cells, expected {len(header)}")
        rows.append({key: _parse_cell(cell) for key, cell in zip(header, record)})
    return rows


_DEFAULTS = {
    "n": 5,
    "gamma": 0.0,
    "h": 0.2,
    "cycle_time": 1.0,
    "cycles_per_period": 1,
    "horizon": 10_000,
    "seed": 42,
    "loss_mode": "deterministic",
    "arrival_prob": 0.06,
    "policy": "maxweight",
}

_CONFIG_KEYS = frozenset(_DEFAULTS) | {"arrival_probs_file", "delay_periods"}


def _convert(key: str, text: str, kind):
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def parse_config(path) -> tuple[RepeaterConfig, RunOptions]:
    """Read a line-oriented `key = value` config file.

    Blank lines and `#` comments are ignored; unknown or duplicate keys and
    out-of-range values are rejected with the offending key named.  Missing
    keys take the documented defaults.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for '{key}'")
        raw[key] = value

    n = _convert("n", raw.get("n", str(_DEFAULTS["n"])), int)
    if n < 1:
        raise ConfigError("n must be >= 1")
    gamma = _convert("gamma", raw.get("gamma", "0"), float)
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError("gamma must lie in [0, 1]")
    h = _convert("h", raw.get("h", str(_DEFAULTS["h"])), float)
    if h < 0.0:
        raise ConfigError("h must be >= 0")
    cycle_time = _convert("cycle_time", raw.get("cycle_time", "1.0"), float)
    if cycle_time <= 0.0:
        raise ConfigError("cycle_time must be > 0")
    cycles_per_period = _convert(
        "cycles_per_period", raw.get("cycles_per_period", "1"), int
    )
    if cycles_per_period < 1:
        raise ConfigError("cycles_per_period must be >= 1")
    horizon = _convert("horizon", raw.get("horizon", str(_DEFAULTS["horizon"])), int)
    if horizon < 1:
        raise ConfigError("horizon must be >= 1")
    seed = _convert("seed", raw.get("seed", str(_DEFAULTS["seed"])), int)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    mode_text = raw.get("loss_mode", _DEFAULTS["loss_mode"])
    try:
        loss_mode = LossMode(mode_text)
    except ValueError:
        raise ConfigError(
            f"loss_mode must be 'deterministic' or 'binomial', got '{mode_text}'"
        ) from None
    policy_text = raw.get("policy", _DEFAULTS["policy"])
    try:
        policy = Policy(policy_text)
    except ValueError:
        raise ConfigError(
            f"policy must be 'maxweight', 'random' or 'delayed', got '{policy_text}'"
        ) from None
    delay_periods = None
    if "delay_periods" in raw:
        delay_periods = _convert("delay_periods", raw["delay_periods"], int)
        if delay_periods < 0:
            raise ConfigError("delay_periods must be >= 0")

    if "arrival_prob" in raw and "arrival_probs_file" in raw:
        raise ConfigError("set either arrival_prob or arrival_probs_file, not both")
    if "arrival_probs_file" in raw:
        probs_path = Path(raw["arrival_probs_file"])
        if not probs_path.is_absolute():
            probs_path = Path(path).parent / probs_path
        try:
            probs = np.loadtxt(probs_path, delimiter=",", ndmin=2)
        except OSError as exc:
            raise ConfigError(f"arrival_probs_file: cannot read: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"arrival_probs_file: cannot parse: {exc}") from None
        if probs.shape != (n, n):
            raise ConfigError(
                f"arrival_probs_file: expected a {n}x{n} matrix, got {probs.shape}"
            )
    else:
        arrival_prob = _convert(
            "arrival_prob", raw.get("arrival_prob", str(_DEFAULTS["arrival_prob"])), float
        )
        if not 0.0 <= arrival_prob <= 1.0:
            raise ConfigError("arrival_prob must lie in [0, 1]")
        probs = np.full((n, n), arrival_prob)

    try:
        config = RepeaterConfig(
            n_connections=n,
            arrival_probs=probs,
            gamma=gamma,
            h=h,
            cycle_time=cycle_time,
            cycles_per_period=cycles_per_period,
            horizon=horizon,
            seed=seed,
            loss_mode=loss_mode,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config, RunOptions(policy=policy, delay_periods=delay_periods)


def default_config() -> RepeaterConfig:
    """The configuration an empty config file resolves to."""
    return RepeaterConfig.uniform(_DEFAULTS["n"], _DEFAULTS["arrival_prob"])


def _execute(args) -> None:
    if not args.scenario:
        raise ConfigError("--scenario is required")
    names = ", ".join(s.value for s in Scenario)
    try:
        scenario = Scenario(args.scenario.lower())
    except ValueError:
        raise ConfigError(f"unknown scenario '{args.scenario}' (expected one of: {names})") from None
    if not args.out:
        raise ConfigError("--out is required")
    if args.config:
        config, options = parse_config(args.config)
    else:
        config, options = default_config(), RunOptions()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if overrides:
        try:
            config = dataclasses.replace(config, **overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    replications = args.replications
    if replications is None:
        replications = _DEFAULT_REPLICATIONS.get(scenario, 1)
    if replications < 1:
        raise ConfigError("replications must be >= 1")
    spec = ScenarioSpec(name=scenario, out_path=str(args.out), replications=replications)
    rows = run_scenario(spec, config, options)
    emit_csv(rows, args.out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="swapqueue-sim",
        description="Run a named scenario of the swapping-queue model and write CSV.",
    )
    parser.add_argument("--scenario", metavar="NAME",
                        help="fig3a, fig3b, fig4a, fig4b, stability or compare")
    parser.add_argument("--config", metavar="PATH", help="key = value config file")
    parser.add_argument("--out", metavar="PATH", help="output CSV path")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--horizon", type=int, help="override the config horizon")
    parser.add_argument("--replications", type=int,
                        help="Monte Carlo replications (stability/compare)")
    args = parser.parse_args(argv)
    try:
        _execute(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
