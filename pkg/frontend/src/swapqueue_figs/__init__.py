"""Render swapqueue CSV outputs to figures.

This package reads only the CSV files written by ``swapqueue-sim``; it has
no dependency on the simulator itself.
"""

from .render import KINDS, build_figure, read_rows, render

__version__ = "0.1.0"

__all__ = ["KINDS", "build_figure", "read_rows", "render"]
