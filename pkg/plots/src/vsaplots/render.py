"""Figure rendering for similarity reports and SSP sweeps.

Pure consumers of the documented CSV schemas: no simulation logic here.
Figures are deterministic for identical inputs (fixed SVG hash salt, no
embedded timestamps).  Output format follows the output path's extension;
.svg (the default suggestion) is vector, .png is raster.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "vsaplots"

import matplotlib.pyplot as plt

from .schema import read_bars, read_sweep

WINNER_COLOR = "#d62728"
BAR_COLOR = "#7f7f7f"
SWEEP_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd")


@dataclass
class PlotJob:
    input_csv: str | Path
    kind: str  # "bars" | "sweep"
    output_path: str | Path
    annotations: list[float] = field(default_factory=list)  # reference x positions

    def __post_init__(self):
        if self.kind not in ("bars", "sweep"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not Path(self.input_csv).exists():
            raise FileNotFoundError(self.input_csv)


def _save(fig, path):
    fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)


def render_bars_figure(rows):
    """One panel per query; bars keep the CSV's vocabulary order; the
    winning entry is highlighted."""
    queries = []
    for row in rows:
        if row.query not in queries:
            queries.append(row.query)
    n_panels = max(len(queries), 1)
    ncols = min(n_panels, 3)
    nrows = (n_panels + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4 * ncols, 3 * nrows), squeeze=False
    )
    flat = [ax for row_axes in axes for ax in row_axes]
    for ax in flat[n_panels:]:
        ax.set_visible(False)
    for ax, query in zip(flat, queries):
        group = [r for r in rows if r.query == query]
        colors = [WINNER_COLOR if r.winner else BAR_COLOR for r in group]
        ax.bar(range(len(group)), [r.similarity for r in group], color=colors)
        ax.set_xticks(range(len(group)))
        ax.set_xticklabels([r.vocab_name for r in group], rotation=30, ha="right")
        ax.set_ylim(-0.3, 1.05)
        ax.set_ylabel("similarity")
        ax.set_title(query)
        ax.axhline(0.0, color="black", linewidth=0.6)
    if not queries:
        flat[0].set_ylabel("similarity")
        flat[0].set_title("(no data)")
    fig.tight_layout()
    return fig


def render_sweep_figure(rows, annotations=()):
    """One similarity curve per query with dotted reference lines."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    queries = []
    for row in rows:
        if row.query not in queries:
            queries.append(row.query)
    for color, query in zip(SWEEP_COLORS * 8, queries):
        group = [(r.x, r.similarity) for r in rows if r.query == query]
        group.sort(key=lambda p: p[0])
        ax.plot([p[0] for p in group], [p[1] for p in group],
                color=color, label=query)
    for ref in annotations:
        ax.axvline(ref, linestyle=":", color="#444444", linewidth=1.2)
    ax.set_xlabel("x")
    ax.set_ylabel("similarity")
    if queries:
        ax.legend()
    fig.tight_layout()
    return fig


def render(job: PlotJob):
    """Render the job's figure to its output path; returns the figure."""
    if job.kind == "bars":
        fig = render_bars_figure(read_bars(job.input_csv))
    else:
        fig = render_sweep_figure(read_sweep(job.input_csv), job.annotations)
    out = Path(job.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    _save(fig, out)
    return fig
