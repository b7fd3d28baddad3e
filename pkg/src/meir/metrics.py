"""Retrieval quality metrics over ranked lists.

Precision@k counts exact label matches in the top k. Recall@k divides
by the total number of same-class items in the database (not the
dataset size). NDCG@k uses binary gains with the 1/log2(i+1) discount
and an ideal ranking truncated at min(k, relevant-in-database).
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

from .errors import KExceedsList, ZeroRelevantWarning
from .index import RankedList, RunResult
from .store import EmbeddingSet


@dataclass(frozen=True)
class RelevanceJudger:
    """Exact-label-match relevance against a fixed database."""

    labels_by_id: dict[str, int]
    relevant_count_per_class: dict[int, int]

    @classmethod
    def from_database(cls, database: EmbeddingSet) -> "RelevanceJudger":
        return cls(
            labels_by_id=dict(zip(database.ids, database.labels)),
            relevant_count_per_class=dict(Counter(database.labels)),
        )

    def relevance(self, ranked: RankedList, query_label: int, k: int) -> list[int]:
        if k > len(ranked.neighbor_ids):
            raise KExceedsList(f"k={k} exceeds list length {len(ranked.neighbor_ids)}")
        return [1 if self.labels_by_id[nid] == query_label else 0
                for nid in ranked.neighbor_ids[:k]]

    def relevant_total(self, query_label: int) -> int:
        return self.relevant_count_per_class.get(query_label, 0)


def precision_at_k(ranked: RankedList, query_label: int,
                   judger: RelevanceJudger, k: int) -> float:
    rel = judger.relevance(ranked, query_label, k)
    return sum(rel) / k


def recall_at_k(ranked: RankedList, query_label: int,
                judger: RelevanceJudger, k: int) -> float:
    rel = judger.relevance(ranked, query_label, k)
    total = judger.relevant_total(query_label)
    if total == 0:
        warnings.warn(
            f"query class {query_label} has no database items; recall defined as 0",
            ZeroRelevantWarning,
        )
        return 0.0
    return sum(rel) / total


def ndcg_at_k(ranked: RankedList, query_label: int,
              judger: RelevanceJudger, k: int) -> float:
    rel = judger.relevance(ranked, query_label, k)
    total = judger.relevant_total(query_label)
    if total == 0:
        return 0.0
    dcg = sum(r / math.log2(i + 2) for i, r in enumerate(rel))
    idcg = sum(1.0 / math.log2(i + 2) for i in range(min(k, total)))
    return dcg / idcg


METRIC_NAMES = ("precision", "recall", "ndcg")

_METRIC_FNS = {
    "precision": precision_at_k,
    "recall": recall_at_k,
    "ndcg": ndcg_at_k,
}


@dataclass
class QueryRow:
    query_id: str
    query_label: int
    values: dict[str, dict[int, float]]  # metric name -> k -> value


@dataclass
class EvalTable:
    method_name: str
    k_values: list[int]
    per_query: list[QueryRow]
    aggregates: dict[str, dict[int, float]] = field(default_factory=dict)
    per_class: dict[int, dict[str, dict[int, float]]] = field(default_factory=dict)

    @property
    def n_queries(self) -> int:
        return len(self.per_query)


def evaluate_run(run: RunResult, query_labels: dict[str, int],
                 judger: RelevanceJudger, k_values: list[int]) -> EvalTable:
    """Per-query metric table for every k, with overall and per-class means."""
    k_max = max(k_values)
    rows = []
    for ranked in run.lists:
        if len(ranked.neighbor_ids) < k_max:
            raise KExceedsList(
                f"query {ranked.query_id}: list length {len(ranked.neighbor_ids)} < k_max {k_max}"
            )
        qlab = query_labels[ranked.query_id]
        values = {
            name: {k: _METRIC_FNS[name](ranked, qlab, judger, k) for k in k_values}
            for name in METRIC_NAMES
        }
        rows.append(QueryRow(ranked.query_id, qlab, values))

    table = EvalTable(method_name=run.method_name, k_values=list(k_values), per_query=rows)
    table.aggregates = {
        name: {k: sum(r.values[name][k] for r in rows) / len(rows) for k in k_values}
        for name in METRIC_NAMES
    }
    classes = sorted({r.query_label for r in rows})
    for c in classes:
        crows = [r for r in rows if r.query_label == c]
        table.per_class[c] = {
            name: {k: sum(r.values[name][k] for r in crows) / len(crows) for k in k_values}
            for name in METRIC_NAMES
        }
    return table


def per_query_vector(table: EvalTable, metric: str, k: int) -> list[float]:
    """One value per query, in query order; feeds the stats module."""
    return [r.values[metric][k] for r in table.per_query]
