"""Figure rendering for simulator sweep reports."""

from .plot import PlotSpec, SchemaError, main, read_rows, render

__all__ = ["PlotSpec", "SchemaError", "main", "read_rows", "render"]
