"""Figure rendering for liepoisson CLI outputs."""

from .levels import level_functions
from .render import KINDS, FigureRequest, read_table, render

__all__ = ["FigureRequest", "KINDS", "level_functions", "read_table", "render"]
