"""Writer for the evaluation engine's `.meir` embedding file format.

The format is the integration contract with the engine: magic ``MEIR``,
u16 LE version (1), u16 reserved, u64 LE n, u64 LE d, then n*d
little-endian float32 values row-major, plus an ``item_id,label``
manifest CSV aligned with matrix row order.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

MAGIC = b"MEIR"
VERSION = 1


def write_embedding_file(matrix: np.ndarray, ids: list[str], labels: list[int],
                         matrix_path, manifest_path) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    n, d = matrix.shape
    if len(ids) != n or len(labels) != n:
        raise ValueError(f"{len(ids)} ids / {len(labels)} labels for {n} rows")
    if not np.isfinite(matrix).all():
        raise ValueError("refusing to write non-finite features")
    header = MAGIC + struct.pack("<HHQQ", VERSION, 0, n, d)
    with open(Path(matrix_path), "wb") as f:
        f.write(header)
        f.write(matrix.tobytes())
    with open(Path(manifest_path), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["item_id", "label"])
        for item_id, label in zip(ids, labels):
            w.writerow([item_id, label])
