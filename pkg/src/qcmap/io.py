"""Plain-text tables with ``#`` metadata headers, and deterministic JSON.

Floats are written with 17 significant digits, which round-trips every IEEE
double exactly, so re-reading a table gives bit-identical arrays.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError


def fmt(x: float) -> str:
    return "%.17g" % x


def write_table(path, names, columns, meta=None, delimiter=","):
    """Write equal-length columns under ``# key = value`` lines and a name row."""
    path = Path(path)
    cols = [np.asarray(c, dtype=float) for c in columns]
    if len({len(c) for c in cols}) > 1:
        raise ValueError("columns differ in length")
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {value}")
    lines.append(delimiter.join(names))
    for row in zip(*cols):
        lines.append(delimiter.join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_table(path, delimiter=","):
    """Inverse of :func:`write_table`; returns (meta, names, dict of arrays)."""
    meta = {}
    names = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            if _:
                meta[key.strip()] = value.strip()
            continue
        if not line.strip():
            continue
        parts = line.split(delimiter) if delimiter.strip() else line.split()
        if names is None:
            names = [p.strip() for p in parts]
        else:
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise ValidationError(f"{path}: non-numeric entry in {line!r}") from exc
            if len(row) != len(names):
                raise ValidationError(f"{path}: expected {len(names)} columns in {line!r}")
            rows.append(row)
    if names is None:
        raise ValidationError(f"{path}: no column header found")
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    return meta, names, {n: data[:, i].copy() for i, n in enumerate(names)}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    """Sorted-key JSON; non-finite floats become null."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.write_text(dumps(obj))
    return path
