"""Presentation layer for the fronthaul simulator: renders the CLI's CSV
artifacts into convergence-trace and survivability figures. All numerical
claims live in the simulator's own test suite; this package only draws."""

__version__ = "0.1.0"

from .plots import (
    PlotError,
    build_convergence_figure,
    build_survivability_figure,
    plot_convergence,
    plot_survivability,
)
from .cli import render_run
