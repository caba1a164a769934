"""Canonical text output: JSON with fixed float formatting, plain CSV.

Every number a command writes goes through :func:`format_float` (17
significant digits, enough to round-trip a double exactly), keys are
sorted, and CSV files use '.' decimals, ',' separators, UTF-8 and LF line
endings.  Identical inputs therefore produce byte-identical files.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


def format_float(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValidationError("non-finite-sample", f"cannot serialize {x!r}")
    return format(x, ".17g")


def _canonical(obj) -> str:
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        inner = ",".join(f"{json.dumps(str(k))}:{_canonical(v)}" for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canonical(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed float formatting, no spaces."""
    return _canonical(obj)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV with ',' separators, '.' decimals, UTF-8, LF line endings."""

    def cell(v) -> str:
        if isinstance(v, (bool, str)):
            return str(v)
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return format_float(v)
        return str(v)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")
