"""Standalone figure scripts for the spiking-VSA CSV outputs."""

from .render import PlotJob, render, render_bars_figure, render_sweep_figure
from .schema import SchemaError, read_bars, read_sweep

__all__ = [
    "PlotJob",
    "SchemaError",
    "read_bars",
    "read_sweep",
    "render",
    "render_bars_figure",
    "render_sweep_figure",
]
