import math
import struct

import numpy as np
import pytest

from meir import errors, store
from meir.store import (
    EmbeddingSet,
    LabelSpace,
    assert_disjoint,
    l2_normalize,
    load_embedding_set,
    save_embedding_set,
)

from conftest import make_set


def roundtrip(es, tmp_path):
    save_embedding_set(es, tmp_path / "x.meir", tmp_path / "x.csv")
    return load_embedding_set(tmp_path / "x.meir", tmp_path / "x.csv")


class TestFormat:
    def test_roundtrip_small(self, tmp_path, rng):
        es = make_set(rng, 3, 4)
        loaded = roundtrip(es, tmp_path)
        assert loaded.ids == es.ids
        assert loaded.labels == es.labels
        assert loaded.matrix.tobytes() == es.matrix.tobytes()

    def test_roundtrip_bytes_identical(self, tmp_path, rng):
        es = make_set(rng, 10, 8)
        save_embedding_set(es, tmp_path / "a.meir", tmp_path / "a.csv")
        loaded = load_embedding_set(tmp_path / "a.meir", tmp_path / "a.csv")
        save_embedding_set(loaded, tmp_path / "b.meir", tmp_path / "b.csv")
        assert (tmp_path / "a.meir").read_bytes() == (tmp_path / "b.meir").read_bytes()
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_file_size_281x1024(self, tmp_path, rng):
        es = make_set(rng, 281, 1024)
        save_embedding_set(es, tmp_path / "x.meir", tmp_path / "x.csv")
        assert (tmp_path / "x.meir").stat().st_size == 24 + 281 * 1024 * 4

    def test_dim_1024_header(self, tmp_path, rng):
        es = make_set(rng, 5, 1024)
        save_embedding_set(es, tmp_path / "x.meir", tmp_path / "x.csv")
        loaded = load_embedding_set(tmp_path / "x.meir", tmp_path / "x.csv")
        assert loaded.dim == 1024

    def test_bad_magic(self, tmp_path, rng):
        es = make_set(rng, 3, 4)
        save_embedding_set(es, tmp_path / "x.meir", tmp_path / "x.csv")
        raw = bytearray((tmp_path / "x.meir").read_bytes())
        raw[:4] = b"NOPE"
        (tmp_path / "x.meir").write_bytes(bytes(raw))
        with pytest.raises(errors.BadMagic):
            load_embedding_set(tmp_path / "x.meir", tmp_path / "x.csv")

    def test_unsupported_version(self, tmp_path, rng):
        es = make_set(rng, 3, 4)
        save_embedding_set(es, tmp_path / "x.meir", tmp_path / "x.csv")
        raw = bytearray((tmp_path / "x.meir").read_bytes())
        raw[4:6] = struct.pack("<H", 99)
        (tmp_path / "x.meir").write_bytes(bytes(raw))
        with pytest.raises(errors.VersionUnsupported):
            load_embedding_set(tmp_path / "x.meir", tmp_path / "x.csv")

    def test_manifest_count_mismatch(self, tmp_path, rng):
        es = make_set(rng, 3, 4)
        save_embedding_set(es, tmp_path / "x.meir", tmp_path / "x.csv")
        lines = (tmp_path / "x.csv").read_text().splitlines()
        (tmp_path / "x.csv").write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(errors.CountMismatch):
            load_embedding_set(tmp_path / "x.meir", tmp_path / "x.csv")

    def test_nonfinite_rejected(self):
        mat = np.ones((2, 3), dtype=np.float32)
        mat[1, 2] = np.nan
        with pytest.raises(errors.NonFiniteValue) as exc:
            EmbeddingSet(["a", "b"], [1, 2], mat)
        assert exc.value.row == 1 and exc.value.col == 2

    def test_duplicate_ids_rejected(self):
        with pytest.raises(errors.DuplicateId):
            EmbeddingSet(["a", "a"], [1, 2], np.ones((2, 3), dtype=np.float32))

    def test_unknown_label_rejected(self, tmp_path, rng):
        es = make_set(rng, 3, 4)
        save_embedding_set(es, tmp_path / "x.meir", tmp_path / "x.csv")
        text = (tmp_path / "x.csv").read_text().replace(f",{es.labels[0]}", ",9", 1)
        (tmp_path / "x.csv").write_text(text)
        with pytest.raises(errors.UnknownLabel):
            load_embedding_set(tmp_path / "x.meir", tmp_path / "x.csv")

    def test_empty_set_rejected(self):
        with pytest.raises(errors.EmptySet):
            EmbeddingSet([], [], np.zeros((0, 4), dtype=np.float32))


class TestLabelSpace:
    def test_default_birads(self):
        ls = LabelSpace()
        assert ls.classes == (1, 2, 3, 4, 5, 6)
        assert 3 in ls and 7 not in ls

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            LabelSpace((2, 1))


class TestNormalize:
    def test_three_four_five(self):
        es = EmbeddingSet(["a"], [1], np.array([[3.0, 4.0]], dtype=np.float32))
        out = l2_normalize(es)
        assert out.matrix[0] == pytest.approx([0.6, 0.8], abs=1e-7)
        assert out.normalized

    def test_idempotent(self, rng):
        es = make_set(rng, 12, 9)
        once = l2_normalize(es)
        twice = l2_normalize(once)
        assert np.abs(once.matrix - twice.matrix).max() <= 1e-7

    def test_norms_unit_independent_recount(self, rng):
        es = l2_normalize(make_set(rng, 20, 16))
        for row in es.matrix:
            ss = sum(float(x) * float(x) for x in row)
            assert abs(math.sqrt(ss) - 1.0) <= 1e-5

    def test_preserves_cosine(self, rng):
        es = make_set(rng, 8, 6)
        normed = l2_normalize(es)
        a, b = es.matrix[2].astype(float), es.matrix[5].astype(float)
        cos_before = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
        cos_after = float(normed.matrix[2].astype(float) @ normed.matrix[5].astype(float))
        assert abs(cos_before - cos_after) <= 1e-6

    def test_zero_vector_rejected(self):
        mat = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.float32)
        with pytest.raises(errors.ZeroVector) as exc:
            l2_normalize(EmbeddingSet(["a", "b"], [1, 2], mat))
        assert exc.value.row == 1

    def test_normalized_flag_detected_on_load(self, tmp_path, rng):
        es = l2_normalize(make_set(rng, 5, 7))
        loaded = roundtrip(es, tmp_path)
        assert loaded.normalized


class TestDisjoint:
    def test_disjoint_ok(self, rng):
        a = make_set(rng, 2, 3, prefix="q")
        b = make_set(rng, 2, 3, prefix="d")
        assert_disjoint(a, b)

    def test_overlap_reported(self, rng):
        mat = np.ones((2, 3), dtype=np.float32)
        a = EmbeddingSet(["q1", "x"], [1, 2], mat)
        b = EmbeddingSet(["x", "d2"], [1, 2], mat)
        with pytest.raises(errors.OverlapDetected) as exc:
            assert_disjoint(a, b)
        assert exc.value.shared_ids == ["x"]

    def test_symmetry_and_naive_oracle(self, rng):
        ids = [f"id{i}" for i in range(1000)]
        pick_a = rng.choice(1000, size=300, replace=False)
        pick_b = rng.choice(1000, size=300, replace=False)
        mat = np.ones((300, 2), dtype=np.float32)
        a = EmbeddingSet([ids[i] for i in pick_a], [1] * 300, mat)
        b = EmbeddingSet([ids[i] for i in pick_b], [1] * 300, mat)
        naive_overlap = sorted(x for x in a.ids for y in b.ids if x == y)
        if naive_overlap:
            with pytest.raises(errors.OverlapDetected) as e1:
                assert_disjoint(a, b)
            with pytest.raises(errors.OverlapDetected) as e2:
                assert_disjoint(b, a)
            assert e1.value.shared_ids == e2.value.shared_ids == naive_overlap
        else:
            assert_disjoint(a, b)
            assert_disjoint(b, a)
