"""Deterministic stratified train/val/test partitioning.

Items are grouped by class, sorted by id (so manifest row order never
matters), shuffled with a splitmix64 stream seeded per class, and cut
into train/val/test using floor-then-largest-remainder counts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .errors import DegenerateRatioWarning, EmptyClass
from .rng import SplitMix64, mix64, shuffle_in_place
from .store import Manifest

RATIO_SUM_TOL = 1e-9


class Partition(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


@dataclass(frozen=True)
class SplitRatios:
    train: float
    val: float
    test: float

    def __post_init__(self):
        for name, r in (("train", self.train), ("val", self.val), ("test", self.test)):
            if not 0.0 < r < 1.0:
                raise ValueError(f"{name} ratio {r} not in (0,1)")
        if abs(self.train + self.val + self.test - 1.0) > RATIO_SUM_TOL:
            raise ValueError("ratios must sum to 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.train, self.val, self.test)


@dataclass
class SplitAssignment:
    assignment: dict[str, Partition]
    per_class_counts: dict[int, tuple[int, int, int]]  # class -> (train, val, test)
    seed: int

    def ids_for(self, part: Partition) -> list[str]:
        return [i for i, p in self.assignment.items() if p == part]


def allocate_counts(m: int, ratios: SplitRatios) -> tuple[int, int, int]:
    """Split m items into three integer counts by largest remainder.

    Remainder ties go in order train, val, test; the per-partition error
    is at most 1 item.
    """
    exact = [r * m for r in ratios.as_tuple()]
    floors = [math.floor(e) for e in exact]
    leftovers = m - sum(floors)
    order = sorted(range(3), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in order[:leftovers]:
        floors[i] += 1
    return tuple(floors)


def stratified_split(manifest: Manifest, ratios: SplitRatios, seed: int) -> SplitAssignment:
    """Deterministically assign every manifest item to a partition.

    Identical (manifest contents, ratios, seed) always produce the
    identical assignment, regardless of manifest row order.
    """
    by_class: dict[int, list[str]] = {}
    for item_id, label in zip(manifest.ids, manifest.labels):
        by_class.setdefault(label, []).append(item_id)

    assignment: dict[str, Partition] = {}
    per_class_counts: dict[int, tuple[int, int, int]] = {}
    for label in sorted(by_class):
        items = sorted(by_class[label])
        if not items:
            raise EmptyClass(f"class {label} has no items")
        counts = allocate_counts(len(items), ratios)
        if len(items) >= 3 and 0 in counts:
            warnings.warn(
                f"class {label} ({len(items)} items) leaves a partition empty: {counts}",
                DegenerateRatioWarning,
            )
        rng = SplitMix64(seed ^ mix64(label))
        shuffle_in_place(items, rng)
        cut1, cut2 = counts[0], counts[0] + counts[1]
        for i, item_id in enumerate(items):
            if i < cut1:
                assignment[item_id] = Partition.TRAIN
            elif i < cut2:
                assignment[item_id] = Partition.VAL
            else:
                assignment[item_id] = Partition.TEST
        per_class_counts[label] = counts

    return SplitAssignment(assignment, per_class_counts, seed)


def serialize_split(split: SplitAssignment) -> str:
    """Render `item_id,partition` CSV text, sorted by item id."""
    lines = ["item_id,partition"]
    for item_id in sorted(split.assignment):
        lines.append(f"{item_id},{split.assignment[item_id].value}")
    return "\n".join(lines) + "\n"
