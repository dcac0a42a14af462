"""JSON encodings for matrices, series, choice sequences and colligations.

Complex matrices are ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` in
row-major order.  Readers also accept a bare ``data`` list for square
matrices (length must be a perfect square), so ``[[0.5, 0]]`` is the 1x1
matrix ``0.5``.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .errors import ParseError


def encode_cmatrix(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "data": [[float(z.real), float(z.imag)] for z in M.reshape(-1)]}


def _entry(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
        return complex(x[0], x[1])
    raise ValueError(f"bad matrix entry {x!r}")


def decode_cmatrix(obj) -> np.ndarray:
    try:
        if isinstance(obj, dict):
            r, c = int(obj["rows"]), int(obj["cols"])
            data = obj.get("data", [])
            if r < 0 or c < 0 or len(data) != r * c:
                raise ValueError(f"data length {len(data)} does not match {r}x{c}")
            vals = [_entry(x) for x in data]
            return np.array(vals, dtype=complex).reshape(r, c)
        if isinstance(obj, list):
            vals = [_entry(x) for x in obj]
            side = math.isqrt(len(vals))
            if side * side != len(vals):
                raise ValueError("bare data list must describe a square matrix")
            return np.array(vals, dtype=complex).reshape(side, side)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix: {exc}") from exc
    raise ValueError(f"expected a matrix object, got {type(obj).__name__}")


def loads(text: str):
    """``json.loads`` that reports failures as :class:`ParseError` with a line number."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True)
