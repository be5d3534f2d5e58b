"""CSV/JSON ingestion and atomic report writing."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ParseError
from .kernelspace import as_measure


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def read_numeric_csv(path) -> np.ndarray:
    """Rows of floats; a non-numeric first row is taken as a header."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    rows = []
    width = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        try:
            values = [_parse_float(c) for c in cells]
        except ValueError as exc:
            if not rows and width is None and lineno == 1:
                width = len(cells)
                continue
            raise ParseError(f"{path}: row {lineno}: {exc}") from None
        if width is None:
            width = len(values)
        if len(values) != width:
            raise ParseError(f"{path}: row {lineno}: expected {width} columns, got {len(values)}")
        rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no numeric rows")
    return np.array(rows, dtype=float)


def read_matrix_csv(path) -> np.ndarray:
    M = read_numeric_csv(path)
    if M.shape[0] != M.shape[1]:
        raise ParseError(f"{path}: kernel matrix must be square, got {M.shape[0]} x {M.shape[1]}")
    return M


read_points_csv = read_numeric_csv


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None


def _atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj) -> str:
    # repr-based float output round-trips every double exactly
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    _atomic_write(path, dumps(obj))


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    _atomic_write(path, buf.getvalue())


def measure_to_json(mu) -> str:
    return json.dumps([float(x) for x in np.asarray(mu, dtype=float)])


def measure_from_json(text: str, n: int | None = None) -> np.ndarray:
    try:
        values = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"measure JSON: {exc.msg}") from None
    if not isinstance(values, list):
        raise ParseError("measure JSON must be an array of numbers")
    return as_measure(values, n)


def parse_measure(value, n: int) -> np.ndarray:
    """A JSON array of weights or the shorthand ``"unit_at:<i>"``."""
    if isinstance(value, str):
        if value.startswith("unit_at:"):
            try:
                i = int(value.split(":", 1)[1])
            except ValueError:
                raise ParseError(f"bad measure shorthand {value!r}") from None
            if not 0 <= i < n:
                raise ParseError(f"unit_at index {i} outside 0..{n - 1}")
            w = np.zeros(n)
            w[i] = 1.0
            return as_measure(w)
        return measure_from_json(value, n)
    return as_measure(value, n)
