"""CSV matrix loading and writing."""

from __future__ import annotations

import csv
import os

import numpy as np

from .exceptions import InputParseError


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_matrix(path) -> np.ndarray:
    """Read a comma-separated numeric matrix.

    A first row containing any non-numeric cell is treated as a header and
    skipped. Raises :class:`InputParseError` for empty files, ragged rows and
    non-numeric cells, naming the 1-based row and column.
    """
    if not os.path.exists(path):
        raise InputParseError(f"{path}: no such file")
    with open(path, newline="") as fh:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in row)]
    if not rows:
        raise InputParseError(f"{path}: empty file")
    if not all(_is_number(c.strip()) for c in rows[0][1]):
        rows = rows[1:]
        if not rows:
            raise InputParseError(f"{path}: header row but no data")
    width = len(rows[0][1])
    data = []
    for lineno, row in rows:
        if len(row) != width:
            raise InputParseError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        values = []
        for col, cell in enumerate(row, start=1):
            try:
                values.append(float(cell.strip()))
            except ValueError:
                raise InputParseError(f"{path}: row {lineno}, column {col}: non-numeric value {cell!r}") from None
        data.append(values)
    return np.array(data, dtype=float)


def write_matrix(path, matrix, header=None) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in matrix:
            writer.writerow([repr(float(v)) for v in row])
