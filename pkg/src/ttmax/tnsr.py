"""Reader and writer for the ``TNSR v1`` plain-text tensor format.

The first line is ``dims: n_1 n_2 ... n_d``; the remaining whitespace
separated tokens are the entries in storage order (last index fastest).
"""

from __future__ import annotations

import io
from math import prod
from os import PathLike
from typing import TextIO

import numpy as np

__all__ = ["read_tnsr", "write_tnsr", "loads", "dumps"]


def loads(text: str) -> np.ndarray:
    return _read(io.StringIO(text))


def dumps(a: np.ndarray) -> str:
    buf = io.StringIO()
    _write(buf, a)
    return buf.getvalue()


def read_tnsr(path: str | PathLike) -> np.ndarray:
    with open(path) as fh:
        return _read(fh)


def write_tnsr(path: str | PathLike, a: np.ndarray) -> None:
    with open(path, "w") as fh:
        _write(fh, a)


def _read(fh: TextIO) -> np.ndarray:
    header = fh.readline()
    key, _, rest = header.partition(":")
    if key.strip() != "dims":
        raise ValueError(f"expected a 'dims:' header, got {header!r}")
    try:
        dims = tuple(int(tok) for tok in rest.split())
    except ValueError as exc:
        raise ValueError(f"bad dims line {header!r}") from exc
    if len(dims) < 2 or min(dims) < 1:
        raise ValueError(f"dims must list at least two positive extents, got {dims}")
    values = np.array(fh.read().split(), dtype=float)
    if values.size != prod(dims):
        raise ValueError(f"expected {prod(dims)} values for dims {dims}, found {values.size}")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite value in tensor data")
    return values.reshape(dims)


def _write(fh: TextIO, a: np.ndarray) -> None:
    a = np.asarray(a, dtype=float)
    fh.write("dims: " + " ".join(str(n) for n in a.shape) + "\n")
    last = a.shape[-1]
    for row in a.reshape(-1, last):
        fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
