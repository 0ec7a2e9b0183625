"""Figure regeneration for d2dcache sweep CSVs."""

from .render import KINDS, MissingColumnError, PlotSpec, RenderError, render

__version__ = "0.1.0"
