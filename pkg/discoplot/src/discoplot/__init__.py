"""Figure rendering for simulator sweep CSVs (rate vs power / distance)."""

from .reader import HEADER, CsvFormatError, ResultRow, read_rows
from .render import AXIS_LABELS, BENCHMARK_STYLES, PlotSpec, build_figure, render

__version__ = "0.1.0"

__all__ = [
    "HEADER",
    "CsvFormatError",
    "ResultRow",
    "read_rows",
    "AXIS_LABELS",
    "BENCHMARK_STYLES",
    "PlotSpec",
    "build_figure",
    "render",
    "__version__",
]
