"""Bit-exact reader/writer for the PHEM embedding matrix format.

Layout: 4 bytes ASCII magic ``PHEM``, then three little-endian uint32 fields
(version=1, n_rows, dim), then ``n_rows * dim`` IEEE-754 binary32 values in
row-major order. No padding, no footer.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import CorpusError, DimMismatch, MissingFile, RowCountMismatch

MAGIC = b"PHEM"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


def write_phem(path: str | Path, matrix: np.ndarray) -> None:
    """Write a 2-D float array to *path* in PHEM format."""
    m = np.ascontiguousarray(matrix, dtype="<f4")
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    n_rows, dim = m.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n_rows, dim))
        fh.write(m.tobytes(order="C"))


def read_phem(path: str | Path) -> np.ndarray:
    """Read a PHEM file into an (n_rows, dim) float32 array."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise CorpusError(f"{path}: shorter than the 16-byte header")
    magic, version, n_rows, dim = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CorpusError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CorpusError(f"{path}: unsupported version {version}")
    if dim < 1:
        raise DimMismatch(f"{path}: dim must be >= 1, got {dim}")
    expected = _HEADER.size + 4 * n_rows * dim
    if len(blob) != expected:
        raise RowCountMismatch(
            f"{path}: payload is {len(blob)} bytes, header implies {expected}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    return data.reshape(n_rows, dim).copy()
