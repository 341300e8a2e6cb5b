"""Binary-free tensor fixtures: a shape line followed by whitespace-separated values."""

from __future__ import annotations

import io
import os

import numpy as np

from .tensor import ShapeError, Tensor, as_tensor


def dumps_tensor(t) -> str:
    """Serialize a tensor: first line holds the dims, then row-major values."""
    t = as_tensor(t)
    if t.ndim < 1:
        raise ShapeError("text format requires rank >= 1")
    buf = io.StringIO()
    buf.write(" ".join(str(d) for d in t.shape) + "\n")
    flat = t.array.reshape(-1)
    per_line = t.shape[-1]
    for start in range(0, flat.size, per_line):
        chunk = flat[start : start + per_line]
        buf.write(" ".join(repr(float(v)) for v in chunk) + "\n")
    return buf.getvalue()


def loads_tensor(text: str) -> Tensor:
    lines = text.strip().splitlines()
    if not lines:
        raise ShapeError("empty tensor text")
    shape = tuple(int(tok) for tok in lines[0].split())
    if not shape or any(d < 1 for d in shape):
        raise ShapeError(f"invalid shape line: {lines[0]!r}")
    values = np.array(
        [float(tok) for line in lines[1:] for tok in line.split()], dtype=np.float64
    )
    expected = int(np.prod(shape, dtype=np.int64))
    if values.size != expected:
        raise ShapeError(f"shape {shape} needs {expected} values, found {values.size}")
    return Tensor._wrap(values.reshape(shape))


def save_tensor(path: str | os.PathLike, t) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_tensor(t))


def load_tensor(path: str | os.PathLike) -> Tensor:
    with open(path, "r", encoding="ascii") as fh:
        return loads_tensor(fh.read())
