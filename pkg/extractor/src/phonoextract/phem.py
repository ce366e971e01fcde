"""Writer for the PHEM embedding container consumed by the analysis toolkit.

Layout: ASCII magic ``PHEM``, three little-endian uint32 fields (version=1,
n_rows, dim), then n_rows x dim IEEE-754 binary32 values row-major. No
padding, no footer.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"PHEM"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


def phem_bytes(matrix: np.ndarray) -> bytes:
    m = np.ascontiguousarray(matrix, dtype="<f4")
    if m.ndim != 2:
        raise ValueError(f"expected 2-D matrix, got {m.shape}")
    n_rows, dim = m.shape
    return _HEADER.pack(MAGIC, VERSION, n_rows, dim) + m.tobytes(order="C")
