"""Image preprocessing and the five test-time augmentation variants.

Every image is resized to 224x224 with bilinear interpolation, converted
to RGB, and channel-normalized with ImageNet statistics. TTA variants:
original, horizontal flip, 5-degree rotation (edge-replicated border),
240-to-224 scale-and-center-crop, and a deterministic per-item color
jitter.
"""

from __future__ import annotations

import hashlib

import numpy as np
import torch
from PIL import Image, ImageEnhance, UnidentifiedImageError

IMAGE_SIZE = 224
SCALE_SIZE = 240
ROTATION_DEG = 5.0
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

TTA_VARIANTS = ("original", "hflip", "rot5", "scale240", "jitter")


class UndecodableImage(Exception):
    pass


def load_image(path) -> Image.Image:
    try:
        with Image.open(path) as img:
            return img.convert("RGB")
    except (UnidentifiedImageError, OSError) as exc:
        raise UndecodableImage(f"{path}: {exc}") from exc


def _rotate_edge_replicated(img: Image.Image, degrees: float) -> Image.Image:
    # pad with replicated edges so rotation never exposes black corners
    pad = 24
    arr = np.asarray(img)
    padded = np.pad(arr, ((pad, pad), (pad, pad), (0, 0)), mode="edge")
    rotated = Image.fromarray(padded).rotate(degrees, resample=Image.BILINEAR)
    w, h = rotated.size
    left, top = (w - img.width) // 2, (h - img.height) // 2
    return rotated.crop((left, top, left + img.width, top + img.height))


def _jitter_factors(item_id: str) -> tuple[float, float, float]:
    """Brightness/contrast/saturation factors in [0.9, 1.1], fixed per item."""
    digest = hashlib.sha256(item_id.encode("utf-8")).digest()
    out = []
    for i in range(3):
        frac = int.from_bytes(digest[i * 4:(i + 1) * 4], "little") / 2**32
        out.append(0.9 + 0.2 * frac)
    return tuple(out)


def _color_jitter(img: Image.Image, item_id: str) -> Image.Image:
    brightness, contrast, saturation = _jitter_factors(item_id)
    img = ImageEnhance.Brightness(img).enhance(brightness)
    img = ImageEnhance.Contrast(img).enhance(contrast)
    return ImageEnhance.Color(img).enhance(saturation)


def apply_variant(img: Image.Image, variant: str, item_id: str) -> Image.Image:
    if variant == "original":
        return img.resize((IMAGE_SIZE, IMAGE_SIZE), Image.BILINEAR)
    if variant == "hflip":
        return img.transpose(Image.FLIP_LEFT_RIGHT).resize(
            (IMAGE_SIZE, IMAGE_SIZE), Image.BILINEAR)
    if variant == "rot5":
        resized = img.resize((IMAGE_SIZE, IMAGE_SIZE), Image.BILINEAR)
        return _rotate_edge_replicated(resized, ROTATION_DEG)
    if variant == "scale240":
        scaled = img.resize((SCALE_SIZE, SCALE_SIZE), Image.BILINEAR)
        off = (SCALE_SIZE - IMAGE_SIZE) // 2
        return scaled.crop((off, off, off + IMAGE_SIZE, off + IMAGE_SIZE))
    if variant == "jitter":
        return _color_jitter(img, item_id).resize(
            (IMAGE_SIZE, IMAGE_SIZE), Image.BILINEAR)
    raise ValueError(f"unknown variant {variant!r}")


def to_tensor(img: Image.Image) -> torch.Tensor:
    """224x224 RGB image to a normalized CHW float tensor."""
    arr = np.asarray(img, dtype=np.float32) / 255.0
    arr = (arr - np.array(IMAGENET_MEAN, dtype=np.float32)) \
        / np.array(IMAGENET_STD, dtype=np.float32)
    return torch.from_numpy(arr.transpose(2, 0, 1).copy())


def preprocess(path, variant: str = "original", item_id: str = "") -> torch.Tensor:
    return to_tensor(apply_variant(load_image(path), variant, item_id))
