import numpy as np
import pytest

from meir import errors
from meir.index import (
    Metric,
    build_index,
    naive_search,
    search,
    search_batch,
    timed_search,
    timing_noise,
)
from meir.store import EmbeddingSet, l2_normalize

from conftest import make_set


def grid_set():
    mat = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]], dtype=np.float32)
    return EmbeddingSet(["row0", "row1", "row2"], [1, 2, 3], mat)


class TestBuild:
    def test_ip_requires_normalized(self, rng):
        db = make_set(rng, 5, 4)
        with pytest.raises(errors.UnnormalizedForIP):
            build_index(db, Metric.IP)

    def test_ip_normalized_ok(self, rng):
        db = l2_normalize(make_set(rng, 281, 64))
        assert build_index(db, Metric.IP).n == 281

    def test_l2_any_set(self, rng):
        assert build_index(make_set(rng, 5, 4), Metric.L2).metric == Metric.L2


class TestSearch:
    def test_l2_hand_geometry(self):
        index = build_index(grid_set(), Metric.L2)
        out = search(index, [0.0, 0.0], 2, query_id="q")
        assert out.neighbor_ids == ["row0", "row1"]
        assert out.scores == pytest.approx([0.0, 1.0])

    def test_ip_self_similarity(self, rng):
        db = l2_normalize(make_set(rng, 10, 8))
        index = build_index(db, Metric.IP)
        out = search(index, db.matrix[3], 1)
        assert out.neighbor_ids == [db.ids[3]]
        assert out.scores[0] == pytest.approx(1.0, abs=1e-5)

    def test_errors(self, rng):
        index = build_index(make_set(rng, 5, 4), Metric.L2)
        with pytest.raises(errors.DimMismatch):
            search(index, [1.0, 2.0], 1)
        with pytest.raises(errors.KOutOfRange):
            search(index, [0.0] * 4, 6)
        with pytest.raises(errors.KOutOfRange):
            search(index, [0.0] * 4, 0)
        with pytest.raises(errors.NonFiniteQuery):
            search(index, [np.nan] * 4, 1)

    def test_duplicate_rows_stable(self):
        mat = np.array([[1.0, 0.0], [0.5, 0.5], [1.0, 0.0]], dtype=np.float32)
        db = EmbeddingSet(["a", "b", "c"], [1, 1, 1], mat)
        out = search(build_index(db, Metric.L2), [1.0, 0.0], 3)
        assert out.neighbor_ids == ["a", "c", "b"]

    def test_prefix_monotonicity(self, rng):
        db = make_set(rng, 30, 8)
        index = build_index(db, Metric.L2)
        q = rng.normal(size=8)
        top5 = search(index, q, 5)
        top10 = search(index, q, 10)
        assert top10.neighbor_ids[:5] == top5.neighbor_ids

    def test_determinism(self, rng):
        db = make_set(rng, 30, 8)
        index = build_index(db, Metric.L2)
        q = rng.normal(size=8)
        assert search(index, q, 7) == search(index, q, 7)


class TestNaiveOracle:
    def test_naive_hand_geometry(self):
        out = naive_search(grid_set(), Metric.L2, [0.0, 0.0], 2)
        assert out.neighbor_ids == ["row0", "row1"]
        assert out.scores == pytest.approx([0.0, 1.0])

    def test_single_row(self, rng):
        db = make_set(rng, 1, 4)
        out = naive_search(db, Metric.L2, [0.0] * 4, 1)
        assert out.neighbor_ids == db.ids

    def test_k_equals_n_total_order(self, rng):
        db = make_set(rng, 12, 5)
        out = naive_search(db, Metric.L2, rng.normal(size=5), 12)
        assert sorted(out.neighbor_ids) == sorted(db.ids)
        assert out.scores == sorted(out.scores)

    def test_oracle_equivalence_sample(self, rng):
        for trial in range(20):
            n = int(rng.integers(2, 60))
            d = int(rng.integers(2, 32))
            db = make_set(rng, n, d, prefix=f"t{trial}_")
            metric = Metric.L2 if trial % 2 == 0 else Metric.IP
            if metric == Metric.IP:
                db = l2_normalize(db)
            k = int(rng.integers(1, n + 1))
            q = rng.normal(size=d)
            if metric == Metric.IP:
                q = q / np.linalg.norm(q)
            fast = search(build_index(db, metric), q, k)
            slow = naive_search(db, metric, q, k)
            assert fast.neighbor_ids == slow.neighbor_ids
            assert fast.scores == pytest.approx(slow.scores, abs=1e-5)


class TestBatch:
    def test_batch_matches_sequential(self, rng):
        db = make_set(rng, 40, 8, prefix="d")
        queries = make_set(rng, 7, 8, prefix="q")
        index = build_index(db, Metric.L2)
        run = search_batch(index, queries, 5)
        assert len(run.lists) == 7
        for i in range(queries.n):
            solo = search(index, queries.matrix[i], 5, query_id=queries.ids[i])
            assert run.lists[i] == solo

    def test_single_query(self, rng):
        db = make_set(rng, 10, 4, prefix="d")
        queries = make_set(rng, 1, 4, prefix="q")
        index = build_index(db, Metric.L2)
        run = search_batch(index, queries, 3)
        assert len(run.lists) == 1
        assert run.lists[0] == search(index, queries.matrix[0], 3, query_id="q0")


class TestMetricDuality:
    def test_rankings_identical_on_normalized(self, rng):
        for trial in range(10):
            db = l2_normalize(make_set(rng, 25, 6, prefix=f"d{trial}_"))
            q = rng.normal(size=6)
            q = q / np.linalg.norm(q)
            l2 = search(build_index(db, Metric.L2), q, 25)
            ip = search(build_index(db, Metric.IP), q, 25)
            assert l2.neighbor_ids == ip.neighbor_ids
            # squared L2 on unit vectors is 2 - 2*dot
            for s_l2, s_ip in zip(l2.scores, ip.scores):
                assert s_l2 == pytest.approx(2.0 - 2.0 * s_ip, abs=1e-5)


class TestTiming:
    def test_timed_search_shape(self, rng):
        db = make_set(rng, 20, 8, prefix="d")
        queries = make_set(rng, 4, 8, prefix="q")
        run, report = timed_search(build_index(db, Metric.L2), queries, 5, repeats=10)
        assert len(run.timings_ns) == 4
        assert all(len(t) == 10 for t in run.timings_ns)
        assert all(s > 0 for t in run.timings_ns for s in t)
        assert report.mean_ms > 0
        assert report.repeats == 10

    def test_repeats_one_std_zero(self, rng):
        db = make_set(rng, 5, 4, prefix="d")
        queries = make_set(rng, 1, 4, prefix="q")
        _, report = timed_search(build_index(db, Metric.L2), queries, 2, repeats=1)
        assert report.std_ms == 0.0

    def test_timed_results_match_search(self, rng):
        db = make_set(rng, 15, 6, prefix="d")
        queries = make_set(rng, 3, 6, prefix="q")
        index = build_index(db, Metric.L2)
        run, _ = timed_search(index, queries, 4, repeats=3)
        plain = search_batch(index, queries, 4)
        assert run.lists == plain.lists

    def test_timing_noise(self):
        noise = timing_noise(100)
        assert noise >= 0.0
        with pytest.raises(errors.KOutOfRange):
            timing_noise(1)

    def test_noise_below_query_means(self, rng):
        db = make_set(rng, 100, 256, prefix="d")
        queries = make_set(rng, 5, 256, prefix="q")
        _, report = timed_search(build_index(db, Metric.L2), queries, 10, repeats=10)
        assert report.noise_ms < report.mean_ms

    def test_noise_repeatable_magnitude(self):
        a, b = timing_noise(200), timing_noise(200)
        # same order of magnitude, generously bounded for shared machines
        assert a < 1.0 and b < 1.0
