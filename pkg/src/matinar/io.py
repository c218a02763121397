"""Long-format series CSV and JSON helpers."""

import csv
import json
from pathlib import Path

import numpy as np

from .process import ModelParams

HEADER = ["t", "row", "col", "value"]


class SeriesFormatError(ValueError):
    """Malformed series CSV; the message names the offending line and column."""


def write_series_csv(path, series):
    """Write a ``(T, m, n)`` count series as rows ``t,row,col,value`` (1-based)."""
    Y = np.asarray(series)
    if Y.ndim != 3:
        raise ValueError("series must have shape (T, m, n)")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        T, m, n = Y.shape
        for t in range(T):
            for i in range(m):
                for j in range(n):
                    w.writerow([t + 1, i + 1, j + 1, int(Y[t, i, j])])


def _int_cell(text, line, column, minimum):
    if text is None or text.strip() == "":
        raise SeriesFormatError(f"line {line}, column '{column}': missing value")
    try:
        value = int(text.strip())
    except ValueError:
        raise SeriesFormatError(
            f"line {line}, column '{column}': {text!r} is not an integer"
        ) from None
    if value < minimum:
        raise SeriesFormatError(f"line {line}, column '{column}': {value} is below {minimum}")
    return value


def read_series_csv(path):
    """Parse a long-format CSV into an int64 array of shape ``(T, m, n)``.

    Every cell of the ``T × m × n`` grid must appear exactly once, with
    ``t``, ``row`` and ``col`` starting at 1 and nonnegative integer values.
    Rows may come in any order.
    """
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SeriesFormatError("line 1: file is empty")
        if [h.strip() for h in header] != HEADER:
            raise SeriesFormatError(f"line 1: header must be {','.join(HEADER)}, got {','.join(header)}")
        for line, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) > len(HEADER):
                raise SeriesFormatError(f"line {line}: expected {len(HEADER)} fields, got {len(row)}")
            row = row + [None] * (len(HEADER) - len(row))
            t, i, j = (_int_cell(row[k], line, HEADER[k], 1) for k in range(3))
            value = _int_cell(row[3], line, "value", 0)
            if (t, i, j) in entries:
                raise SeriesFormatError(f"line {line}: duplicate entry for t={t}, row={i}, col={j}")
            entries[(t, i, j)] = value
    if not entries:
        raise SeriesFormatError("no data rows")
    keys = np.array(list(entries))
    T, m, n = keys.max(axis=0)
    if len(entries) != T * m * n:
        for t in range(1, T + 1):
            for i in range(1, m + 1):
                for j in range(1, n + 1):
                    if (t, i, j) not in entries:
                        raise SeriesFormatError(
                            f"missing entry t={t}, row={i}, col={j} (shape {T}x{m}x{n})"
                        )
    Y = np.empty((T, m, n), dtype=np.int64)
    for (t, i, j), v in entries.items():
        Y[t - 1, i - 1, j - 1] = v
    return Y


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_params_json(path):
    """Load :class:`ModelParams` from a JSON document (``m, n, p, A, B, Lambda``)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    if "params" in doc and isinstance(doc["params"], dict):
        doc = doc["params"]
    missing = [k for k in ("A", "B", "Lambda") if k not in doc]
    if missing:
        raise ValueError(f"{path}: missing field(s) {', '.join(missing)}")
    return ModelParams.from_dict(doc)


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def ensure_dir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
