"""CSV point-set files: one point per row, optional single header row."""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .geometry import PointSet


class PointFileError(ValueError):
    """A point-set file could not be parsed; the message names row and column."""


def _parse(field: str) -> float | None:
    try:
        return float(field)
    except ValueError:
        return None


def read_points(path: str | os.PathLike, dim: int | None = None) -> PointSet:
    """Load a point set. Rows and columns in messages are 1-based."""
    rows: list[list[float]] = []
    width = dim
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        first = True
        for raw in reader:
            line = reader.line_num
            fields = [f.strip() for f in raw]
            if not fields or all(f == "" for f in fields):
                continue
            parsed = [_parse(f) for f in fields]
            if first and all(v is None for v in parsed):
                # header row: fixes the dimension even when no data follows
                first = False
                if width is not None and width != len(fields):
                    raise PointFileError(f"row {line}: header has {len(fields)} columns, expected {width}")
                width = len(fields)
                continue
            first = False
            if width is None:
                width = len(fields)
            if len(fields) != width:
                raise PointFileError(f"row {line}: expected {width} columns, found {len(fields)}")
            for col, (text, v) in enumerate(zip(fields, parsed), start=1):
                if v is None:
                    raise PointFileError(f"row {line}, column {col}: cannot parse {text!r} as a number")
                if not (0.0 <= v <= 1.0):
                    raise PointFileError(f"row {line}, column {col}: coordinate {text} is outside [0, 1]")
            rows.append(parsed)  # type: ignore[arg-type]
    if width is None:
        raise PointFileError(f"{path}: no header and no data, dimension unknown")
    if not rows:
        return PointSet.empty(width)
    return PointSet(np.array(rows, dtype=np.float64), dim=width)


def write_points(path: str | os.PathLike, pts: PointSet | np.ndarray) -> None:
    """Write with a header ``x1..xd`` and round-trip exact float text."""
    arr = pts.points if isinstance(pts, PointSet) else np.asarray(pts, dtype=np.float64)
    d = arr.shape[1]
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{k + 1}" for k in range(d)])
        for row in arr:
            writer.writerow([repr(float(v)) for v in row])
