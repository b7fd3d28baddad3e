"""Embedding data model and bit-exact on-disk format.

A feature file is a `.meir` binary: magic ``MEIR``, u16 LE version (1),
u16 reserved (0), u64 LE n, u64 LE d, then n*d little-endian float32
values row-major (24-byte header). A sidecar manifest CSV
(``item_id,label``) carries ids and class labels aligned with matrix
row order.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    CountMismatch,
    DuplicateId,
    EmptySet,
    IoFailure,
    NonFiniteValue,
    OverlapDetected,
    UnknownLabel,
    VersionUnsupported,
    ZeroVector,
)

MAGIC = b"MEIR"
VERSION = 1
HEADER_SIZE = 24
UNIT_NORM_TOL = 1e-5
ZERO_NORM_THRESHOLD = 1e-12


@dataclass(frozen=True)
class LabelSpace:
    """Ordered set of category codes (BIRADS uses 1..6)."""

    classes: tuple[int, ...] = (1, 2, 3, 4, 5, 6)

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("label space classes must be unique")
        if list(self.classes) != sorted(self.classes):
            raise ValueError("label space classes must be sorted ascending")

    def __contains__(self, label: int) -> bool:
        return label in self.classes


@dataclass(frozen=True)
class Manifest:
    """Aligned (item_id, label, source_path) rows for a feature file."""

    ids: tuple[str, ...]
    labels: tuple[int, ...]
    source_paths: tuple[str, ...] | None = None

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class EmbeddingSet:
    """n aligned (id, label, d-vector) rows; the engine's universal currency.

    Treated as immutable after construction: operations return new sets.
    """

    ids: list[str]
    labels: list[int]
    matrix: np.ndarray  # (n, d) float32
    normalized: bool = field(default=False)

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float32)
        validate_embedding_set(self)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def validate_embedding_set(es: EmbeddingSet, label_space: LabelSpace | None = None) -> None:
    if es.matrix.ndim != 2:
        raise EmptySet("matrix must be 2-dimensional")
    n, d = es.matrix.shape
    if n < 1 or d < 1:
        raise EmptySet(f"need n >= 1 and d >= 1, got {n}x{d}")
    if len(es.ids) != n or len(es.labels) != n:
        raise CountMismatch(
            f"{len(es.ids)} ids / {len(es.labels)} labels for {n} matrix rows"
        )
    if len(set(es.ids)) != n:
        seen: set[str] = set()
        dupes = [i for i in es.ids if i in seen or seen.add(i)]
        raise DuplicateId(f"duplicate item ids: {sorted(set(dupes))[:10]}")
    finite = np.isfinite(es.matrix)
    if not finite.all():
        row, col = np.argwhere(~finite)[0]
        raise NonFiniteValue(int(row), int(col))
    if label_space is not None:
        for lab in es.labels:
            if lab not in label_space:
                raise UnknownLabel(f"label {lab} not in {label_space.classes}")
    if es.normalized:
        dev = np.abs(np.linalg.norm(es.matrix.astype(np.float64), axis=1) - 1.0)
        if dev.max() > UNIT_NORM_TOL:
            bad = int(dev.argmax())
            raise ValueError(f"normalized flag set but row {bad} is not unit norm")


def _is_unit_normalized(matrix: np.ndarray) -> bool:
    norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
    return bool(np.abs(norms - 1.0).max() <= UNIT_NORM_TOL)


def save_embedding_set(es: EmbeddingSet, matrix_path, manifest_path) -> None:
    """Write the `.meir` matrix file and its manifest CSV.

    Round-trips bit-exactly: load(save(x)) reproduces the matrix bytes.
    """
    matrix_path, manifest_path = Path(matrix_path), Path(manifest_path)
    header = MAGIC + struct.pack("<HHQQ", VERSION, 0, es.n, es.dim)
    try:
        with open(matrix_path, "wb") as f:
            f.write(header)
            f.write(np.ascontiguousarray(es.matrix, dtype="<f4").tobytes())
        with open(manifest_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["item_id", "label"])
            for item_id, label in zip(es.ids, es.labels):
                w.writerow([item_id, label])
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_manifest(manifest_path, label_space: LabelSpace | None = None) -> Manifest:
    """Read a manifest CSV with columns item_id,label[,source_path]."""
    label_space = label_space or LabelSpace()
    ids, labels, paths = [], [], []
    try:
        with open(manifest_path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or "item_id" not in reader.fieldnames:
                raise BadMagic(f"{manifest_path}: missing item_id column")
            has_path = "source_path" in reader.fieldnames
            for row in reader:
                ids.append(row["item_id"])
                try:
                    labels.append(int(row["label"]))
                except (KeyError, TypeError, ValueError):
                    raise UnknownLabel(f"bad label in manifest row for {row['item_id']!r}")
                if has_path:
                    paths.append(row["source_path"])
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if len(set(ids)) != len(ids):
        raise DuplicateId(f"{manifest_path}: duplicate item ids")
    for lab in labels:
        if lab not in label_space:
            raise UnknownLabel(f"label {lab} not in {label_space.classes}")
    return Manifest(tuple(ids), tuple(labels), tuple(paths) if paths else None)


def load_embedding_set(matrix_path, manifest_path,
                       label_space: LabelSpace | None = None) -> EmbeddingSet:
    """Load and validate a `.meir` file and its aligned manifest."""
    matrix_path = Path(matrix_path)
    try:
        raw = matrix_path.read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if len(raw) < HEADER_SIZE or raw[:4] != MAGIC:
        raise BadMagic(f"{matrix_path}: not a MEIR file")
    version, _reserved, n, d = struct.unpack("<HHQQ", raw[4:HEADER_SIZE])
    if version != VERSION:
        raise VersionUnsupported(f"{matrix_path}: version {version}, expected {VERSION}")
    expected = HEADER_SIZE + n * d * 4
    if len(raw) != expected:
        raise CountMismatch(
            f"{matrix_path}: payload is {len(raw)} bytes, header implies {expected}"
        )
    if n < 1 or d < 1:
        raise EmptySet(f"{matrix_path}: {n}x{d}")
    matrix = np.frombuffer(raw, dtype="<f4", offset=HEADER_SIZE).reshape(n, d).copy()

    manifest = read_manifest(manifest_path, label_space)
    if len(manifest) != n:
        raise CountMismatch(
            f"manifest has {len(manifest)} rows, matrix has {n}"
        )
    es = EmbeddingSet(list(manifest.ids), list(manifest.labels), matrix)
    es.normalized = _is_unit_normalized(matrix)
    return es


def l2_normalize(es: EmbeddingSet) -> EmbeddingSet:
    """Scale every row to unit Euclidean norm (64-bit accumulation).

    Rows with norm below 1e-12 have no meaningful direction and are
    rejected.
    """
    mat = es.matrix.astype(np.float64)
    norms = np.linalg.norm(mat, axis=1)
    if norms.min() < ZERO_NORM_THRESHOLD:
        raise ZeroVector(int(norms.argmin()))
    out = (mat / norms[:, None]).astype(np.float32)
    result = EmbeddingSet(list(es.ids), list(es.labels), out)
    result.normalized = True
    validate_embedding_set(result)
    return result


def assert_disjoint(a: EmbeddingSet, b: EmbeddingSet) -> None:
    """Fail with the shared ids if the two sets overlap."""
    shared = set(a.ids) & set(b.ids)
    if shared:
        raise OverlapDetected(shared)
