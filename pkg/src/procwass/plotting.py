"""Aggregation of sweep records and static SVG rendering."""

from __future__ import annotations

import os
from collections import defaultdict
from typing import NamedTuple

import numpy as np

from .bench import METHODS, SweepRecord

AXES = ("d", "n", "sigma")
_LABELS = {"d": "dimension d", "n": "number of points n", "sigma": "noise level sigma"}


class CellSummary(NamedTuple):
    method: str
    x: float
    mean: float
    std: float
    count: int


def aggregate(records, x_axis: str, metric: str = "overlap") -> list[CellSummary]:
    """Mean and sample standard deviation of ``metric`` per (method, x).

    The standard deviation uses ``ddof=1`` and is 0 for a single replicate.
    Output is ordered by method (canonical order) then by x.
    """
    if x_axis not in AXES:
        raise ValueError(f"x_axis must be one of {AXES}, got {x_axis!r}")
    records = list(records)
    _check_single_cell(records, x_axis)
    groups: dict[tuple[str, float], list[float]] = defaultdict(list)
    for r in records:
        groups[(r.method, float(getattr(r, x_axis)))].append(float(getattr(r, metric)))
    order = {m: i for i, m in enumerate(METHODS)}
    out = []
    for (method, x), values in sorted(groups.items(), key=lambda kv: (order.get(kv[0][0], len(order)), kv[0][0], kv[0][1])):
        v = np.asarray(values)
        std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        out.append(CellSummary(method, x, float(np.mean(v)), std, int(v.size)))
    return out


def _check_single_cell(records: list[SweepRecord], x_axis: str) -> None:
    for other in AXES:
        if other == x_axis:
            continue
        values = {getattr(r, other) for r in records}
        if len(values) > 1:
            raise ValueError(
                f"records mix several values of {other} ({sorted(values)}); "
                f"filter to a single {other} before plotting against {x_axis}"
            )


def render_plot(records, x_axis: str, path: str | os.PathLike, title: str | None = None) -> None:
    """Mean overlap per method against ``x_axis`` with std error bars, as SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    records = list(records)
    if not records:
        raise ValueError("no records to plot")
    summary = aggregate(records, x_axis)
    fixed = {a: getattr(records[0], a) for a in AXES if a != x_axis}
    with matplotlib.rc_context({"svg.hashsalt": "procwass", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        try:
            for method in dict.fromkeys(s.method for s in summary):
                rows = [s for s in summary if s.method == method]
                ax.errorbar(
                    [s.x for s in rows],
                    [s.mean for s in rows],
                    yerr=[s.std for s in rows],
                    marker="o",
                    capsize=3,
                    label=method,
                )
            ax.set_xlabel(_LABELS[x_axis])
            ax.set_ylabel("overlap")
            ax.set_ylim(-0.05, 1.05)
            if title is None:
                title = ", ".join(f"{k}={v:g}" for k, v in fixed.items())
            ax.set_title(title)
            ax.legend(loc="best")
            ax.grid(alpha=0.3)
            fig.tight_layout()
            fig.savefig(os.fspath(path), format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
