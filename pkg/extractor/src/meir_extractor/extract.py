"""Batched feature extraction from an image directory into `.meir` files."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .backbones import FEATURE_DIMS, build_backbone
from .preprocess import TTA_VARIANTS, UndecodableImage, preprocess
from .writer import write_embedding_file


@dataclass
class ExtractorConfig:
    backbone: str
    image_dir: Path
    manifest: Path
    out_prefix: Path
    tta: bool = False
    batch_size: int = 16
    weights: str = "pretrained"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.backbone not in FEATURE_DIMS:
            raise ValueError(f"unknown backbone {self.backbone!r}")


@dataclass
class ManifestRow:
    item_id: str
    label: int
    rel_path: str


def read_image_manifest(path) -> list[ManifestRow]:
    rows = []
    with open(path, newline="") as f:
        for rec in csv.DictReader(f):
            rows.append(ManifestRow(rec["item_id"], int(rec["label"]),
                                    rec["source_path"]))
    ids = [r.item_id for r in rows]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate item ids in manifest")
    return rows


def _extract_variant(model, config: ExtractorConfig, rows: list[ManifestRow],
                     variant: str) -> tuple[np.ndarray, list[ManifestRow]]:
    kept, tensors = [], []
    features = []
    for row in rows:
        try:
            tensors.append(preprocess(config.image_dir / row.rel_path,
                                      variant, row.item_id))
            kept.append(row)
        except UndecodableImage as exc:
            warnings.warn(f"skipping {row.item_id}: {exc}")
        if len(tensors) == config.batch_size:
            with torch.no_grad():
                features.append(model(torch.stack(tensors)).numpy())
            tensors = []
    if tensors:
        with torch.no_grad():
            features.append(model(torch.stack(tensors)).numpy())
    if not kept:
        raise ValueError("no decodable images")
    return np.vstack(features).astype(np.float32), kept


def extract(config: ExtractorConfig) -> list[Path]:
    """Extract features; one `.meir`/manifest pair per variant.

    Without TTA the output is ``<prefix>.meir``; with TTA five aligned
    files ``<prefix>_<variant>.meir`` sharing id order.
    """
    rows = read_image_manifest(config.manifest)
    model = build_backbone(config.backbone, weights=config.weights)
    variants = TTA_VARIANTS if config.tta else ("original",)
    written = []

    # decode once up front so every variant skips the same bad images
    decodable = []
    for row in rows:
        try:
            preprocess(config.image_dir / row.rel_path, "original", row.item_id)
            decodable.append(row)
        except UndecodableImage as exc:
            warnings.warn(f"skipping {row.item_id}: {exc}")

    for variant in variants:
        matrix, kept = _extract_variant(model, config, decodable, variant)
        assert matrix.shape[1] == FEATURE_DIMS[config.backbone]
        if config.tta:
            stem = f"{config.out_prefix}_{variant}"
        else:
            stem = str(config.out_prefix)
        matrix_path, manifest_path = Path(f"{stem}.meir"), Path(f"{stem}.csv")
        matrix_path.parent.mkdir(parents=True, exist_ok=True)
        write_embedding_file(matrix, [r.item_id for r in kept],
                             [r.label for r in kept], matrix_path, manifest_path)
        written.append(matrix_path)
    return written
