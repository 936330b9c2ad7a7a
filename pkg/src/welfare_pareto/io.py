"""CSV and JSON helpers with round-trip float formatting."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np


class SchemaError(ValueError):
    """Raised when an input table lacks a required column or has bad values."""


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest string that parses back exactly
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([format_value(v) for v in row])
    return path


def write_columns(path, columns: Mapping[str, Sequence]) -> Path:
    """Write equal-length columns as a CSV with a header row."""
    names = list(columns)
    data = [list(columns[k]) for k in names]
    if len({len(c) for c in data}) > 1:
        raise ValueError("columns have different lengths")
    return write_csv(path, names, zip(*data))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and "".join(r).strip()]
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise SchemaError(f"{path}: line {i} has {len(r)} fields, header has {len(header)}")
    return header, rows[1:]


def read_columns(path, required: Sequence[str] = (), optional: Sequence[str] = (),
                 numeric: Optional[Sequence[str]] = None) -> dict[str, np.ndarray]:
    """Read named columns; ``numeric`` columns (default: all requested) become floats."""
    header, rows = read_csv(path)
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required column {missing[0]!r}")
    wanted = list(required) + [c for c in optional if c in header]
    numeric = wanted if numeric is None else numeric
    out = {}
    for name in wanted:
        j = header.index(name)
        raw = [r[j].strip() for r in rows]
        if name in numeric:
            try:
                vals = np.array([float(v) for v in raw])
            except ValueError:
                raise SchemaError(f"{path}: column {name!r} has a non-numeric value") from None
            if not np.all(np.isfinite(vals)):
                raise SchemaError(f"{path}: column {name!r} has a non-finite value")
            out[name] = vals
        else:
            out[name] = np.array(raw)
    return out


def _json_default(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Path):
        return str(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _clean(v):
    # JSON has no infinities; write them as strings
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def write_json(path, obj) -> Path:
    path = Path(path)
    text = json.dumps(_clean(json.loads(json.dumps(obj, default=_json_default))),
                      indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    return path
