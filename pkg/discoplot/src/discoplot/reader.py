"""Strict reader for the sweep-results CSV schema.

The schema is the contract with the simulator CLI:
``axis,axis_value,benchmark,mean_rate,ci95,n_trials,seed``. This package
never imports the simulator; the CSV file is the whole interface.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

HEADER = ("axis", "axis_value", "benchmark", "mean_rate", "ci95", "n_trials", "seed")


class CsvFormatError(ValueError):
    """The input file does not follow the sweep-results schema."""


@dataclass(frozen=True)
class ResultRow:
    axis_value: float
    benchmark: str
    mean_rate: float
    ci95: float
    n_trials: int
    seed: int


def read_rows(path) -> tuple[str | None, list[ResultRow]]:
    """Parse a results CSV; returns (axis name, rows).

    The axis is None for a header-only file. A malformed row raises
    :class:`CsvFormatError` naming its line number.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != HEADER:
            raise CsvFormatError(f"{path}: expected header {','.join(HEADER)}, got {header}")
        axis = None
        rows = []
        for lineno, line in enumerate(reader, start=2):
            if not line:
                continue
            if len(line) != len(HEADER):
                raise CsvFormatError(f"{path}: row {lineno} has {len(line)} fields, expected {len(HEADER)}")
            try:
                row = ResultRow(
                    axis_value=float(line[1]),
                    benchmark=line[2],
                    mean_rate=float(line[3]),
                    ci95=float(line[4]),
                    n_trials=int(line[5]),
                    seed=int(line[6]),
                )
            except ValueError as exc:
                raise CsvFormatError(f"{path}: row {lineno} is malformed: {exc}") from None
            if axis is None:
                axis = line[0]
            elif line[0] != axis:
                raise CsvFormatError(f"{path}: row {lineno} changes the axis column")
            rows.append(row)
    return axis, rows
