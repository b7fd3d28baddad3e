"""Extractor test suite, including the end-to-end acceptance criterion."""

import csv
import hashlib
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import torch
from PIL import Image

from meir.fusion import average_features
from meir.store import load_embedding_set

from meir_extractor.backbones import FEATURE_DIMS, build_backbone
from meir_extractor.extract import ExtractorConfig, extract, read_image_manifest
from meir_extractor.preprocess import (IMAGENET_MEAN, IMAGENET_STD,
                                       TTA_VARIANTS, UndecodableImage,
                                       apply_variant, load_image, preprocess,
                                       to_tensor)
from meir_extractor.writer import write_embedding_file


def verdict(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] {name}" + (f" :: {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def make_images(root: Path, n: int, seed: int = 7):
    """Write n small deterministic PNGs and a matching manifest CSV."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(n):
        arr = rng.integers(0, 256, size=(96, 128, 3), dtype=np.uint8)
        name = f"img_{i:03d}.png"
        Image.fromarray(arr).save(root / name)
        rows.append((f"item-{i:03d}", 1 + i % 6, name))
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["item_id", "label", "source_path"])
        w.writerows(rows)
    return manifest


class TestPreprocess:
    def test_resize_to_224(self, tmp_path):
        path = tmp_path / "wide.png"
        Image.new("RGB", (1000, 800), (10, 20, 30)).save(path)
        tensor = preprocess(path)
        assert tensor.shape == (3, 224, 224)

    def test_mid_gray_normalization(self, tmp_path):
        # uniform mid-gray pixel value v maps exactly to (v/255 - mean)/std
        path = tmp_path / "gray.png"
        Image.new("RGB", (64, 64), (128, 128, 128)).save(path)
        tensor = preprocess(path)
        for c in range(3):
            expected = (128 / 255 - IMAGENET_MEAN[c]) / IMAGENET_STD[c]
            assert torch.allclose(tensor[c], torch.full((224, 224), expected),
                                  atol=1e-6)

    def test_undecodable_raises(self, tmp_path):
        path = tmp_path / "broken.png"
        path.write_bytes(b"this is not a png")
        with pytest.raises(UndecodableImage):
            load_image(path)

    def test_variants_change_pixels(self, tmp_path):
        path = tmp_path / "noise.png"
        rng = np.random.default_rng(1)
        Image.fromarray(rng.integers(0, 256, (96, 96, 3), dtype=np.uint8)).save(path)
        img = load_image(path)
        base = np.asarray(apply_variant(img, "original", "x"))
        for variant in TTA_VARIANTS[1:]:
            out = np.asarray(apply_variant(img, variant, "x"))
            assert out.shape == (224, 224, 3)
            assert not np.array_equal(out, base), variant

    def test_jitter_deterministic_per_item(self, tmp_path):
        path = tmp_path / "noise.png"
        rng = np.random.default_rng(2)
        Image.fromarray(rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)).save(path)
        img = load_image(path)
        a = np.asarray(apply_variant(img, "jitter", "item-a"))
        b = np.asarray(apply_variant(img, "jitter", "item-a"))
        c = np.asarray(apply_variant(img, "jitter", "item-b"))
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_to_tensor_channel_order(self):
        arr = np.zeros((224, 224, 3), dtype=np.uint8)
        arr[..., 0] = 255  # pure red
        tensor = to_tensor(Image.fromarray(arr))
        assert tensor[0].mean() > tensor[1].mean()
        assert tensor[0].mean() > tensor[2].mean()


class TestWriter:
    def test_round_trip_through_engine(self, tmp_path):
        rng = np.random.default_rng(3)
        matrix = rng.standard_normal((5, 8)).astype(np.float32)
        ids = [f"i{k}" for k in range(5)]
        labels = [1, 2, 3, 4, 5]
        write_embedding_file(matrix, ids, labels,
                             tmp_path / "x.meir", tmp_path / "x.csv")
        loaded = load_embedding_set(tmp_path / "x.meir", tmp_path / "x.csv")
        assert loaded.ids == ids
        assert loaded.labels == labels
        assert np.array_equal(loaded.matrix, matrix)

    def test_rejects_non_finite(self, tmp_path):
        matrix = np.array([[1.0, np.nan]], dtype=np.float32)
        with pytest.raises(ValueError):
            write_embedding_file(matrix, ["a"], [1],
                                 tmp_path / "x.meir", tmp_path / "x.csv")

    def test_count_mismatch(self, tmp_path):
        matrix = np.zeros((2, 3), dtype=np.float32)
        with pytest.raises(ValueError):
            write_embedding_file(matrix, ["a"], [1],
                                 tmp_path / "x.meir", tmp_path / "x.csv")


class TestBackbones:
    @pytest.mark.parametrize("name,dim", sorted(FEATURE_DIMS.items()))
    def test_feature_dims(self, name, dim):
        model = build_backbone(name, weights="none")
        with torch.no_grad():
            out = model(torch.zeros(2, 3, 224, 224))
        assert out.shape == (2, dim)

    def test_unknown_backbone(self):
        with pytest.raises(ValueError):
            build_backbone("alexnet")

    def test_seeded_init_is_reproducible(self):
        a = build_backbone("densenet121", weights="none")
        b = build_backbone("densenet121", weights="none")
        for pa, pb in zip(a.parameters(), b.parameters()):
            assert torch.equal(pa, pb)


class TestExtract:
    def test_manifest_duplicate_ids(self, tmp_path):
        manifest = tmp_path / "m.csv"
        manifest.write_text("item_id,label,source_path\na,1,x.png\na,2,y.png\n")
        with pytest.raises(ValueError):
            read_image_manifest(manifest)

    def test_skips_undecodable_with_warning(self, tmp_path):
        manifest = make_images(tmp_path, 4)
        (tmp_path / "img_001.png").write_bytes(b"garbage")
        config = ExtractorConfig("densenet121", tmp_path, manifest,
                                 tmp_path / "out", weights="none", batch_size=2)
        with pytest.warns(UserWarning, match="skipping item-001"):
            extract(config)
        loaded = load_embedding_set(tmp_path / "out.meir", tmp_path / "out.csv")
        assert loaded.ids == ["item-000", "item-002", "item-003"]

    def test_cli_runs(self, tmp_path):
        manifest = make_images(tmp_path / "imgs", 3)
        result = subprocess.run(
            [sys.executable, "-m", "meir_extractor.cli",
             "--backbone", "densenet121", "--images", str(tmp_path / "imgs"),
             "--manifest", str(manifest), "--out", str(tmp_path / "feat"),
             "--weights", "none", "--batch-size", "2"],
            capture_output=True, text=True)
        assert result.returncode == 0, result.stderr
        assert (tmp_path / "feat.meir").exists()


class TestAcceptanceSecondary:
    def test_extraction_pipeline(self, tmp_path):
        """[SECONDARY] extractor outputs validate against the engine.

        Ten sample images per backbone; every emitted file must load
        through the engine's reader with the documented feature dims,
        TTA must emit five aligned variant files whose feature average
        also loads cleanly, and repeat extraction must be file-identical.
        """
        manifest = make_images(tmp_path / "imgs", 10)
        problems = []

        for name, dim in sorted(FEATURE_DIMS.items()):
            config = ExtractorConfig(name, tmp_path / "imgs", manifest,
                                     tmp_path / f"{name}", weights="none",
                                     batch_size=4)
            extract(config)
            loaded = load_embedding_set(tmp_path / f"{name}.meir",
                                        tmp_path / f"{name}.csv")
            if loaded.matrix.shape != (10, dim):
                problems.append(f"{name} shape {loaded.matrix.shape}")

        # TTA: five aligned variant files for one backbone
        tta = ExtractorConfig("densenet121", tmp_path / "imgs", manifest,
                              tmp_path / "tta", weights="none", tta=True,
                              batch_size=4)
        extract(tta)
        sets = []
        for variant in TTA_VARIANTS:
            stem = tmp_path / f"tta_{variant}"
            sets.append(load_embedding_set(Path(f"{stem}.meir"),
                                           Path(f"{stem}.csv")))
        if len({tuple(s.ids) for s in sets}) != 1:
            problems.append("TTA variant files not id-aligned")
        averaged = average_features(sets)
        write_embedding_file(averaged.matrix, list(averaged.ids),
                             list(averaged.labels),
                             tmp_path / "avg.meir", tmp_path / "avg.csv")
        reloaded = load_embedding_set(tmp_path / "avg.meir", tmp_path / "avg.csv")
        if reloaded.matrix.shape != (10, FEATURE_DIMS["densenet121"]):
            problems.append("averaged TTA features failed to round-trip")

        # determinism: a second run writes byte-identical output
        rerun = ExtractorConfig("densenet121", tmp_path / "imgs", manifest,
                                tmp_path / "rerun", weights="none", batch_size=4)
        extract(rerun)
        first = hashlib.sha256(
            (tmp_path / "densenet121.meir").read_bytes()).hexdigest()
        second = hashlib.sha256(
            (tmp_path / "rerun.meir").read_bytes()).hexdigest()
        if first != second:
            problems.append("repeat extraction not file-identical")

        verdict("extraction pipeline end-to-end", not problems,
                "; ".join(problems) or
                "3 backbones validated, TTA aligned, rerun identical")
