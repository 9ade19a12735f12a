"""Portable matrix files: int64 row/col counts, then interleaved re/im doubles.

Little-endian throughout.  Used for caching subspace bases and epsilon-net
vectors; the format is dumb on purpose so any language can read it back.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<qq")


def save_matrix(path, M: np.ndarray) -> None:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2:
        raise ValueError("save_matrix expects a vector or matrix")
    rows, cols = M.shape
    inter = np.empty((rows, cols, 2), dtype="<f8")
    inter[..., 0] = M.real
    inter[..., 1] = M.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(rows, cols))
        fh.write(inter.tobytes())


def load_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    rows, cols = _HEADER.unpack_from(raw)
    n = rows * cols * 2
    data = np.frombuffer(raw, dtype="<f8", count=n, offset=_HEADER.size)
    if data.size != n:
        raise ValueError(f"truncated matrix file {path}")
    inter = data.reshape(rows, cols, 2)
    return (inter[..., 0] + 1j * inter[..., 1]).astype(np.complex128)
