"""JSON text format for matrices and Kraus sets.

A matrix document looks like::

    {"rows": 2, "cols": 2, "data": [0.5, [0.5, 0.0], 0.5, 0.5]}

``data`` is row-major; each entry is either a real number or an
``[re, im]`` pair. Floats are written with ``repr`` so they round-trip
exactly.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .numerics import DimensionError


def _entry(z: complex) -> Any:
    z = complex(z)
    if z.imag == 0.0:
        return float(z.real)
    return [float(z.real), float(z.imag)]


def matrix_to_doc(m) -> dict:
    m = np.atleast_2d(np.asarray(m))
    rows, cols = m.shape
    return {"rows": rows, "cols": cols, "data": [_entry(z) for z in m.reshape(-1)]}


def matrix_from_doc(doc: dict) -> np.ndarray:
    try:
        rows, cols, data = int(doc["rows"]), int(doc["cols"]), doc["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"matrix document needs rows, cols and data: {exc}") from None
    if len(data) != rows * cols:
        raise DimensionError(f"data has {len(data)} entries, expected {rows * cols}")
    values = []
    for x in data:
        if isinstance(x, (list, tuple)):
            if len(x) != 2:
                raise ValueError(f"complex entry must be [re, im], got {x!r}")
            values.append(complex(float(x[0]), float(x[1])))
        else:
            values.append(complex(float(x), 0.0))
    m = np.array(values, dtype=complex).reshape(rows, cols)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if not np.any(m.imag):
        return m.real.copy()
    return m


def dumps_matrix(m) -> str:
    return json.dumps(matrix_to_doc(m))


def loads_matrix(text: str) -> np.ndarray:
    return matrix_from_doc(json.loads(text))


def load_matrix(path: str | Path) -> np.ndarray:
    return loads_matrix(Path(path).read_text(encoding="utf-8"))


def save_matrix(path: str | Path, m) -> None:
    Path(path).write_text(dumps_matrix(m) + "\n", encoding="utf-8")


def kraus_to_doc(ops: Sequence[np.ndarray]) -> list:
    return [matrix_to_doc(a) for a in ops]


def kraus_from_doc(doc: list) -> list[np.ndarray]:
    if not isinstance(doc, list):
        raise ValueError("a Kraus set document is a list of matrices")
    return [np.asarray(matrix_from_doc(d), dtype=complex) for d in doc]
