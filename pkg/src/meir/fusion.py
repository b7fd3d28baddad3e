"""Ensemble construction: concatenation, feature averaging, PCA,
score-level weighted/attention fusion, and best-two selection."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    DimMismatch,
    IdOrderMismatch,
    LabelMismatch,
    RankDeficientWarning,
    RowOrderMismatch,
    TooFewMethods,
    TooFewSets,
    WeightCountMismatch,
)
from .index import RankedList
from .store import EmbeddingSet

WEIGHT_SUM_TOL = 1e-9
ZSCORE_SD_FLOOR = 1e-12


class FusionMode(str, Enum):
    CONCAT = "concat"
    FEATURE_AVERAGE = "feature_average"
    PCA = "pca"
    SCORE_WEIGHTED = "score_weighted"
    SCORE_ATTENTION = "score_attention"


@dataclass(frozen=True)
class FusionSpec:
    mode: FusionMode
    components: tuple[str, ...]
    weights: tuple[float, ...] | None = None
    target_dim: int | None = None

    def __post_init__(self):
        if self.weights is not None:
            if any(w < 0 for w in self.weights):
                raise ValueError("fusion weights must be nonnegative")
            if abs(sum(self.weights) - 1.0) > WEIGHT_SUM_TOL:
                raise ValueError("fusion weights must sum to 1")


def _check_aligned(sets: list[EmbeddingSet], require_same_dim: bool) -> None:
    if len(sets) < 2:
        raise TooFewSets("need at least 2 embedding sets")
    first = sets[0]
    for s in sets[1:]:
        if s.ids != first.ids:
            raise IdOrderMismatch("component sets must list identical ids in order")
        if s.labels != first.labels:
            raise LabelMismatch("component sets must carry identical labels")
        if require_same_dim and s.dim != first.dim:
            raise DimMismatch(f"dims differ: {s.dim} vs {first.dim}")


def concat_features(sets: list[EmbeddingSet]) -> EmbeddingSet:
    """Horizontal concatenation; caller re-normalizes before IP indexing."""
    _check_aligned(sets, require_same_dim=False)
    matrix = np.hstack([s.matrix for s in sets])
    return EmbeddingSet(list(sets[0].ids), list(sets[0].labels), matrix)


def average_features(sets: list[EmbeddingSet]) -> EmbeddingSet:
    """Elementwise mean across aligned same-dim sets (TTA aggregation)."""
    _check_aligned(sets, require_same_dim=True)
    stacked = np.stack([s.matrix.astype(np.float64) for s in sets])
    mean = stacked.mean(axis=0).astype(np.float32)
    return EmbeddingSet(list(sets[0].ids), list(sets[0].labels), mean)


@dataclass
class PcaModel:
    mean: np.ndarray  # (d,)
    basis: np.ndarray  # (target_dim, d), orthonormal rows
    explained_variance: np.ndarray  # (target_dim,), nonincreasing

    @property
    def input_dim(self) -> int:
        return self.mean.shape[0]

    @property
    def target_dim(self) -> int:
        return self.basis.shape[0]


def pca_fit(train_set: EmbeddingSet, target_dim: int) -> PcaModel:
    """Principal axes of the sample covariance, descending variance.

    Sign convention: the first coordinate of each axis with magnitude
    above 1e-12 is made positive, so repeated fits agree exactly.
    """
    n, d = train_set.n, train_set.dim
    if n < 2:
        raise TooFewSets("PCA needs at least 2 training rows")
    if not 1 <= target_dim <= min(n - 1, d):
        raise DimMismatch(f"target_dim {target_dim} outside [1, min(n-1, d)={min(n-1, d)}]")
    x = train_set.matrix.astype(np.float64)
    mean = x.mean(axis=0)
    centered = x - mean
    cov = (centered.T @ centered) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals, kind="stable")[::-1]
    eigvals = eigvals[order]
    basis = eigvecs[:, order].T  # rows are components

    # relative floor: eigenvalues at roundoff scale count as zero
    pos_floor = max(eigvals.max(), 0.0) * 1e-10
    if (eigvals[:target_dim] <= pos_floor).any():
        n_pos = int((eigvals > pos_floor).sum())
        warnings.warn(
            f"only {n_pos} positive eigenvalues for target_dim={target_dim}; "
            "padding with the orthonormal complement",
            RankDeficientWarning,
        )
    basis = basis[:target_dim].copy()
    for row in basis:
        nz = np.nonzero(np.abs(row) > 1e-12)[0]
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return PcaModel(mean=mean, basis=basis,
                    explained_variance=np.maximum(eigvals[:target_dim], 0.0))


def pca_project(model: PcaModel, es: EmbeddingSet) -> EmbeddingSet:
    """Project rows onto the principal axes: (x - mean) @ basis.T."""
    if es.dim != model.input_dim:
        raise DimMismatch(f"set dim {es.dim} != model dim {model.input_dim}")
    coords = (es.matrix.astype(np.float64) - model.mean) @ model.basis.T
    return EmbeddingSet(list(es.ids), list(es.labels), coords.astype(np.float32))


def save_pca_model(model: PcaModel, matrix_path, header_path) -> None:
    """Persist mean + basis as a raw float32 matrix with a JSON header."""
    rows = np.vstack([model.mean[None, :], model.basis]).astype("<f4")
    Path(matrix_path).write_bytes(rows.tobytes())
    header = {
        "input_dim": model.input_dim,
        "target_dim": model.target_dim,
        "explained_variance": [float(v) for v in model.explained_variance],
    }
    Path(header_path).write_text(json.dumps(header, indent=2) + "\n")


def load_pca_model(matrix_path, header_path) -> PcaModel:
    header = json.loads(Path(header_path).read_text())
    d, t = header["input_dim"], header["target_dim"]
    rows = np.frombuffer(Path(matrix_path).read_bytes(), dtype="<f4").reshape(t + 1, d)
    return PcaModel(
        mean=rows[0].astype(np.float64),
        basis=rows[1:].astype(np.float64),
        explained_variance=np.array(header["explained_variance"], dtype=np.float64),
    )


def zscore(scores: np.ndarray) -> np.ndarray:
    """Mean-0 sd-1 over database rows; constant vectors map to zeros."""
    scores = np.asarray(scores, dtype=np.float64)
    sd = scores.std()
    if sd < ZSCORE_SD_FLOOR:
        return np.zeros_like(scores)
    return (scores - scores.mean()) / sd


def attention_weights(z_vectors: list[np.ndarray]) -> np.ndarray:
    """Softmax over each method's top-1 z-score: query-adaptive weights."""
    tops = np.array([z.max() for z in z_vectors])
    tops = tops - tops.max()
    w = np.exp(tops)
    return w / w.sum()


def score_fusion(query_id: str, method_scores: list[np.ndarray],
                 database_ids: list[str], spec: FusionSpec, k: int) -> RankedList:
    """Fuse per-method similarity score vectors into a single top-k list.

    All inputs must cover the same database rows in the same order and
    be oriented larger-is-more-similar (negate L2 scores on entry).
    """
    if spec.mode not in (FusionMode.SCORE_WEIGHTED, FusionMode.SCORE_ATTENTION):
        raise ValueError(f"score_fusion does not handle mode {spec.mode}")
    n_db = len(database_ids)
    for s in method_scores:
        if np.asarray(s).shape != (n_db,):
            raise RowOrderMismatch("every score vector must cover the full database")
    z_vectors = [zscore(s) for s in method_scores]

    if spec.mode == FusionMode.SCORE_WEIGHTED:
        if spec.weights is None or len(spec.weights) != len(method_scores):
            raise WeightCountMismatch(
                f"{0 if spec.weights is None else len(spec.weights)} weights "
                f"for {len(method_scores)} methods"
            )
        weights = np.array(spec.weights, dtype=np.float64)
    else:
        weights = attention_weights(z_vectors)

    fused = np.zeros(n_db)
    for w, z in zip(weights, z_vectors):
        fused += w * z
    order = np.argsort(-fused, kind="stable")[:k]
    return RankedList(
        query_id=query_id,
        neighbor_ids=[database_ids[i] for i in order],
        scores=[float(fused[i]) for i in order],
    )


def select_best_two(validation_scores: dict[str, float]) -> tuple[str, str]:
    """Two methods with highest validation precision@10, ties by name."""
    if len(validation_scores) < 2:
        raise TooFewMethods("need at least 2 methods to select from")
    ranked = sorted(validation_scores, key=lambda m: (-validation_scores[m], m))
    return ranked[0], ranked[1]
