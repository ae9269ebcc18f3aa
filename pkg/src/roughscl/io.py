"""CSV and JSON readers/writers for paths, solutions and reports."""

import csv
import json
import math

import numpy as np

from .paths import PathError, PiecewiseLinearPath


class InputFormatError(ValueError):
    pass


def _rows(fh, header):
    reader = csv.reader(fh)
    try:
        first = next(reader)
    except StopIteration:
        raise InputFormatError("empty file") from None
    if [c.strip() for c in first] != list(header):
        raise InputFormatError(f"expected header {','.join(header)}, got {','.join(first)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise InputFormatError(f"line {lineno}: expected {len(header)} fields")
        try:
            out.append([float(c) for c in row])
        except ValueError:
            raise InputFormatError(f"line {lineno}: non-numeric field") from None
    return np.array(out, dtype=float).reshape(-1, len(header))


def read_path(filename) -> PiecewiseLinearPath:
    """Read a ``t,z`` CSV. Times must start at 0 with ``z(0) = 0`` and be
    strictly increasing."""
    with open(filename, newline="", encoding="utf-8") as fh:
        data = _rows(fh, ("t", "z"))
    if data.shape[0] < 2:
        raise InputFormatError("a path needs at least two rows")
    if data[0, 0] != 0.0 or data[0, 1] != 0.0:
        raise InputFormatError("first row must be 0,0")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise InputFormatError("times must be strictly increasing (no duplicates)")
    try:
        return PiecewiseLinearPath(data[:, 0], data[:, 1])
    except PathError as exc:
        raise InputFormatError(str(exc)) from exc


def write_path(filename, path: PiecewiseLinearPath):
    # repr round-trips doubles exactly
    with open(filename, "w", newline="", encoding="utf-8") as fh:
        fh.write("t,z\n")
        for t, v in zip(path.times.tolist(), path.values.tolist()):
            fh.write(f"{t!r},{v!r}\n")


def write_solution(filename, sol):
    with open(filename, "w", newline="", encoding="utf-8") as fh:
        fh.write("x,u\n")
        for x, u in zip(sol.centers.tolist(), sol.cell_averages.tolist()):
            fh.write(f"{x!r},{u!r}\n")


def read_solution(filename):
    """Return ``(centers, values)`` from an ``x,u`` CSV."""
    with open(filename, newline="", encoding="utf-8") as fh:
        data = _rows(fh, ("x", "u"))
    return data[:, 0], data[:, 1]


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(filename, payload):
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n"
    if filename is None or filename == "-":
        return text
    with open(filename, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text
