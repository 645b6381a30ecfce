"""Static figure rendering for twin-beam sweep CSV output."""

__version__ = "0.1.0"

from .render import FIGURES, PlotSpec, RenderError, load_csv, render, spec_for
