"""Command-line entry point for the feature extractor."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backbones import FEATURE_DIMS, WeightDownloadFailure
from .extract import ExtractorConfig, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meir-extract",
        description="Extract CNN features into .meir embedding files.")
    parser.add_argument("--backbone", required=True, choices=sorted(FEATURE_DIMS))
    parser.add_argument("--images", required=True, type=Path,
                        help="directory containing the image files")
    parser.add_argument("--manifest", required=True, type=Path,
                        help="CSV with item_id,label,source_path columns")
    parser.add_argument("--out", required=True, type=Path,
                        help="output path prefix for .meir/.csv pairs")
    parser.add_argument("--tta", action="store_true",
                        help="emit all five augmentation variants")
    parser.add_argument("--weights", default="pretrained",
                        help='"pretrained", "none", or a checkpoint path')
    parser.add_argument("--batch-size", type=int, default=16)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = ExtractorConfig(
        backbone=args.backbone,
        image_dir=args.images,
        manifest=args.manifest,
        out_prefix=args.out,
        tta=args.tta,
        batch_size=args.batch_size,
        weights=args.weights,
    )
    try:
        written = extract(config)
    except WeightDownloadFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
