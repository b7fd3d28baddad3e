"""CNN feature extractor emitting `.meir` embedding files."""

from .backbones import FEATURE_DIMS, WeightDownloadFailure, build_backbone
from .extract import ExtractorConfig, extract, read_image_manifest
from .preprocess import TTA_VARIANTS, UndecodableImage, preprocess
from .writer import write_embedding_file

__version__ = "0.1.0"

__all__ = [
    "FEATURE_DIMS",
    "WeightDownloadFailure",
    "build_backbone",
    "ExtractorConfig",
    "extract",
    "read_image_manifest",
    "TTA_VARIANTS",
    "UndecodableImage",
    "preprocess",
    "write_embedding_file",
    "__version__",
]
