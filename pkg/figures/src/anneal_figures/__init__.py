"""Renderer for anneal-scaling experiment outputs (strict consumer, no physics)."""

__version__ = "0.1.0"

from .reader import InputDataError, load_summary, load_table
from .render import FIGURE_IDS, FigureSpec, render
