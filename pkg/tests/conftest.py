import numpy as np
import pytest

from meir.store import EmbeddingSet


def make_set(rng: np.random.Generator, n: int, d: int, prefix: str = "item",
             labels=None) -> EmbeddingSet:
    matrix = rng.normal(size=(n, d)).astype(np.float32)
    if labels is None:
        labels = [int(x) for x in rng.integers(1, 7, size=n)]
    return EmbeddingSet([f"{prefix}{i}" for i in range(n)], list(labels), matrix)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
