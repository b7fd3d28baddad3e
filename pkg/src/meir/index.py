"""Exact flat similarity search with a naive oracle and timing harness.

Two metrics: squared Euclidean distance (ascending) and inner product
(descending, cosine once the database is unit-normalized). The fast
path vectorizes with numpy; `naive_search` is an intentionally plain
per-row scan kept as an independent cross-check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DimMismatch,
    KOutOfRange,
    NonFiniteQuery,
    UnnormalizedForIP,
)
from .store import EmbeddingSet


class Metric(str, Enum):
    L2 = "l2"  # squared Euclidean distance, smaller is better
    IP = "ip"  # inner product over unit vectors, larger is better


@dataclass(frozen=True)
class RankedList:
    query_id: str
    neighbor_ids: list[str]
    scores: list[float]


@dataclass
class RunResult:
    method_name: str
    metric: Metric
    k_max: int
    lists: list[RankedList]
    timings_ns: list[list[int]] = field(default_factory=list)  # per query, per repeat


@dataclass(frozen=True)
class TimingReport:
    mean_ms: float
    std_ms: float
    noise_ms: float
    repeats: int
    per_query_means_ms: list[float]


class ExactIndex:
    """Immutable exhaustive index over a database EmbeddingSet."""

    def __init__(self, database: EmbeddingSet, metric: Metric):
        if metric == Metric.IP and not database.normalized:
            raise UnnormalizedForIP(
                "inner-product search requires a unit-normalized database"
            )
        self.database = database
        self.metric = metric
        # 64-bit working copy: scores accumulate in double precision
        self._mat = database.matrix.astype(np.float64)

    @property
    def n(self) -> int:
        return self.database.n

    @property
    def dim(self) -> int:
        return self.database.dim


def build_index(database: EmbeddingSet, metric: Metric) -> ExactIndex:
    return ExactIndex(database, metric)


def _check_query(index: ExactIndex, query: np.ndarray, k: int) -> np.ndarray:
    query = np.asarray(query, dtype=np.float64).ravel()
    if query.shape[0] != index.dim:
        raise DimMismatch(f"query dim {query.shape[0]} != index dim {index.dim}")
    if not np.isfinite(query).all():
        raise NonFiniteQuery("query vector contains NaN or infinity")
    if not 1 <= k <= index.n:
        raise KOutOfRange(f"k={k} outside [1, {index.n}]")
    return query


def _score_vector(index: ExactIndex, query: np.ndarray) -> np.ndarray:
    """Full metric scores of a query against every database row."""
    if index.metric == Metric.L2:
        diff = index._mat - query
        return np.einsum("ij,ij->i", diff, diff)
    return index._mat @ query


def _top_k(scores: np.ndarray, k: int, metric: Metric) -> np.ndarray:
    # stable sort keeps ascending row position among ties
    key = scores if metric == Metric.L2 else -scores
    return np.argsort(key, kind="stable")[:k]


def search(index: ExactIndex, query_vector, k: int, query_id: str = "") -> RankedList:
    """Exact top-k under the index metric, stable row-order tie-break."""
    query = _check_query(index, query_vector, k)
    scores = _score_vector(index, query)
    order = _top_k(scores, k, index.metric)
    ids = index.database.ids
    return RankedList(
        query_id=query_id,
        neighbor_ids=[ids[i] for i in order],
        scores=[float(scores[i]) for i in order],
    )


def full_scores(index: ExactIndex, query_vector) -> np.ndarray:
    """Metric scores against all rows, in database row order."""
    query = _check_query(index, query_vector, 1)
    return _score_vector(index, query)


def naive_search(database: EmbeddingSet, metric: Metric, query_vector, k: int,
                 query_id: str = "") -> RankedList:
    """Reference oracle: unoptimized per-row scalar scan plus sort."""
    if metric == Metric.IP and not database.normalized:
        raise UnnormalizedForIP("inner-product search requires normalized database")
    query = list(np.asarray(query_vector, dtype=np.float64).ravel())
    if len(query) != database.dim:
        raise DimMismatch(f"query dim {len(query)} != database dim {database.dim}")
    if any(not math.isfinite(x) for x in query):
        raise NonFiniteQuery("query vector contains NaN or infinity")
    if not 1 <= k <= database.n:
        raise KOutOfRange(f"k={k} outside [1, {database.n}]")

    scored = []
    for row_idx in range(database.n):
        row = database.matrix[row_idx]
        if metric == Metric.L2:
            s = 0.0
            for a, b in zip(row, query):
                diff = float(a) - b
                s += diff * diff
        else:
            s = 0.0
            for a, b in zip(row, query):
                s += float(a) * b
        scored.append((s, row_idx))

    if metric == Metric.L2:
        scored.sort(key=lambda t: (t[0], t[1]))
    else:
        scored.sort(key=lambda t: (-t[0], t[1]))
    top = scored[:k]
    return RankedList(
        query_id=query_id,
        neighbor_ids=[database.ids[i] for _, i in top],
        scores=[s for s, _ in top],
    )


def search_batch(index: ExactIndex, queries: EmbeddingSet, k: int,
                 method_name: str = "") -> RunResult:
    """Search every query row; output order matches query order."""
    if queries.dim != index.dim:
        raise DimMismatch(f"query dim {queries.dim} != index dim {index.dim}")
    lists = []
    for i in range(queries.n):
        try:
            lists.append(search(index, queries.matrix[i], k, query_id=queries.ids[i]))
        except Exception as exc:
            exc.args = (f"query {i} ({queries.ids[i]}): {exc}",)
            raise
    return RunResult(method_name=method_name, metric=index.metric, k_max=k, lists=lists)


def timed_search(index: ExactIndex, queries: EmbeddingSet, k: int,
                 repeats: int = 10, method_name: str = "") -> tuple[RunResult, TimingReport]:
    """Per-query repeated timing on a monotonic nanosecond clock.

    Runs single-threaded and sequential by contract; the returned result
    keeps the last repeat's ranked lists (all repeats are identical).
    """
    if repeats < 1:
        raise KOutOfRange("repeats must be >= 1")
    lists = []
    timings_ns: list[list[int]] = []
    for i in range(queries.n):
        qvec = queries.matrix[i]
        qid = queries.ids[i]
        samples = []
        result = None
        for _ in range(repeats):
            t0 = time.perf_counter_ns()
            result = search(index, qvec, k, query_id=qid)
            t1 = time.perf_counter_ns()
            samples.append(max(t1 - t0, 1))  # clock floor: never report zero
        lists.append(result)
        timings_ns.append(samples)

    flat = np.array([s for q in timings_ns for s in q], dtype=np.float64) / 1e6
    report = TimingReport(
        mean_ms=float(flat.mean()),
        std_ms=float(flat.std(ddof=1)) if flat.size > 1 else 0.0,
        noise_ms=timing_noise(max(repeats, 2)),
        repeats=repeats,
        per_query_means_ms=[float(np.mean(q) / 1e6) for q in timings_ns],
    )
    run = RunResult(method_name=method_name, metric=index.metric, k_max=k,
                    lists=lists, timings_ns=timings_ns)
    return run, report


def timing_noise(repeats: int) -> float:
    """Std dev (ms) of timing an empty region: the measurement floor."""
    if repeats < 2:
        raise KOutOfRange("timing_noise needs repeats >= 2")
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        t1 = time.perf_counter_ns()
        samples.append(max(t1 - t0, 1))
    arr = np.array(samples, dtype=np.float64) / 1e6
    return float(arr.std(ddof=1))
