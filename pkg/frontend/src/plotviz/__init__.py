"""Line plots from povm-shadows experiment CSVs.

Reads only the public CSV contract (comment lines with run metadata, then a
header row and records); one plotted series per POVM size, plus a horizontal
reference line for a constant bound series when present.
"""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaError, load_series, render

__all__ = ["PlotSpec", "SchemaError", "load_series", "render"]
