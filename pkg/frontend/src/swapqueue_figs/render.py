"""Figure builders for the swapqueue CSV schemas.

Five kinds are supported, one per scenario family:

- ``surface3a``: extended-period surface over the pi_s x h grid
- ``surface3b``: noise-penalty surface over the h x n grid
- ``curves4a``:  analytic delay curves, log-log, one series per set kind
- ``curves4b``:  outgoing/incoming ratio curves, log x
- ``stability-trace``: per-period backlog traces with the analytic bound

``build_figure`` returns the matplotlib figure for inspection; ``render``
saves it next to the input CSV (or to an explicit path).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

SET_KINDS = ("perfect", "complete", "noncomplete")


def read_rows(path) -> list[dict[str, str]]:
    """Read a header-first CSV into string-valued row dicts."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        return list(reader)


def _require(rows: list[dict[str, str]], columns: tuple[str, ...], kind: str) -> None:
    if not rows:
        raise ValueError(f"{kind}: no data rows")
    missing = [c for c in columns if c not in rows[0]]
    if missing:
        raise ValueError(f"{kind}: missing columns {missing}")


def _floats(rows: list[dict[str, str]], column: str) -> list[float]:
    return [float(r[column]) for r in rows]


def _fig_surface3a(rows):
    _require(rows, ("pi_s", "h", "pi_s_star"), "surface3a")
    fig = plt.figure(figsize=(7, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot_trisurf(
        _floats(rows, "pi_s"), _floats(rows, "h"), _floats(rows, "pi_s_star"),
        cmap="viridis", linewidth=0.1,
    )
    ax.set_xlabel("swapping period")
    ax.set_ylabel("processing overhead h")
    ax.set_zlabel("extended period")
    return fig


def _fig_surface3b(rows):
    _require(rows, ("h", "n", "f_gamma"), "surface3b")
    fig = plt.figure(figsize=(7, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot_trisurf(
        _floats(rows, "h"), _floats(rows, "n"), _floats(rows, "f_gamma"),
        cmap="viridis", linewidth=0.1,
    )
    ax.set_xlabel("processing overhead h")
    ax.set_ylabel("connections n")
    ax.set_zlabel("noise penalty f")
    return fig


def _series_by_kind(rows, value_column):
    series = {}
    for row in rows:
        series.setdefault(row["set_type"], ([], []))
        xs, ys = series[row["set_type"]]
        xs.append(float(row["b_total"]))
        ys.append(float(row[value_column]))
    return series


def _fig_curves4a(rows):
    _require(rows, ("b_total", "set_type", "delay"), "curves4a")
    fig, ax = plt.subplots(figsize=(7, 5))
    for kind in SET_KINDS:
        if kind in (series := _series_by_kind(rows, "delay")):
            xs, ys = series[kind]
            ax.plot(xs, ys, label=kind)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("incoming rate (pairs per period)")
    ax.set_ylabel("delay bound (periods)")
    ax.legend()
    return fig


def _fig_curves4b(rows):
    _require(rows, ("b_total", "set_type", "ratio"), "curves4b")
    fig, ax = plt.subplots(figsize=(7, 5))
    for kind in SET_KINDS:
        if kind in (series := _series_by_kind(rows, "ratio")):
            xs, ys = series[kind]
            ax.plot(xs, ys, label=kind)
    ax.set_xscale("log")
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("incoming rate (pairs per period)")
    ax.set_ylabel("outgoing / incoming rate")
    ax.legend()
    return fig


def _fig_stability_trace(rows):
    _require(rows, ("row_type", "replication", "period", "z_total"), "stability-trace")
    periods = [r for r in rows if r["row_type"] == "period"]
    if not periods:
        raise ValueError("stability-trace: no period rows")
    fig, ax = plt.subplots(figsize=(8, 5))
    by_rep: dict[str, tuple[list[float], list[float]]] = {}
    for row in periods:
        xs, ys = by_rep.setdefault(row["replication"], ([], []))
        xs.append(float(row["period"]))
        ys.append(float(row["z_total"]))
    for rep, (xs, ys) in sorted(by_rep.items()):
        ax.plot(xs, ys, linewidth=0.7, alpha=0.8, label=f"replication {rep}")
    bounds = {
        float(r["z_bound"]) for r in rows if r["row_type"] == "summary" and r.get("z_bound")
    }
    for bound in sorted(bounds):
        ax.axhline(bound, linestyle="--", color="black", label=f"backlog bound {bound:g}")
    ax.set_xlabel("period")
    ax.set_ylabel("total backlog")
    if len(by_rep) <= 8:
        ax.legend(fontsize="small")
    return fig


KINDS = {
    "surface3a": _fig_surface3a,
    "surface3b": _fig_surface3b,
    "curves4a": _fig_curves4a,
    "curves4b": _fig_curves4b,
    "stability-trace": _fig_stability_trace,
}


def build_figure(kind: str, rows: list[dict[str, str]]):
    """Build the figure for one CSV kind from parsed rows."""
    try:
        builder = KINDS[kind]
    except KeyError:
        names = ", ".join(sorted(KINDS))
        raise ValueError(f"unknown kind '{kind}' (expected one of: {names})") from None
    return builder(rows)


def render(csv_path, kind: str, out_path=None) -> Path:
    """Render one CSV file to PNG and return the output path."""
    csv_path = Path(csv_path)
    out = Path(out_path) if out_path is not None else csv_path.with_suffix(".png")
    fig = build_figure(kind, read_rows(csv_path))
    try:
        fig.savefig(out, dpi=150, bbox_inches="tight")
    finally:
        plt.close(fig)
    return out
