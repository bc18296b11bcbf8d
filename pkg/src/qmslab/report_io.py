"""Deterministic JSON and CSV emission.

Reports must be byte-identical across runs with the same inputs, so the
serializer is written out by hand: insertion key order, floats at 17
significant digits (enough to round-trip a double), no whitespace
surprises.  Non-finite floats are a bug in report assembly and raise.
"""

from __future__ import annotations

import json
import math

import numpy as np


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float reached the report serializer")
    return f"{x:.17g}"


def dumps(obj) -> str:
    """Serialize dicts (insertion order), sequences, strings, booleans,
    integers, floats and None."""
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__} deterministically")


def matrix_to_json(m) -> dict:
    """Complex matrix as separate real/imaginary dense row-major arrays."""
    m = np.asarray(m, dtype=complex)
    return {
        "re": [[float(v) for v in row] for row in m.real],
        "im": [[float(v) for v in row] for row in m.imag],
    }


def write_csv(path: str, header: list[str], rows) -> None:
    """Plain CSV, header mandatory, floats at 17 significant digits."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
