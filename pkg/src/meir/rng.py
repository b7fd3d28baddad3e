"""Deterministic counter-based RNG (splitmix64).

Every stochastic step in the engine (shuffling, bootstrap resampling)
draws from splitmix64 streams so identical seeds reproduce identical
results across runs and platforms. The stream is counter-based: value i
of seed s is mix64(s + (i+1)*GAMMA), which makes the vectorized and
scalar paths trivially consistent.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """Finalizing mix of splitmix64; a 64-bit bijection."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential splitmix64 stream."""

    def __init__(self, seed: int):
        self._seed = seed & _MASK
        self._i = 0

    def next_u64(self) -> int:
        self._i += 1
        return mix64(self._seed + self._i * _GAMMA)

    def next_below(self, bound: int) -> int:
        """Uniform-ish integer in [0, bound). Modulo bias is irrelevant
        here; determinism is the contract."""
        return self.next_u64() % bound


def u64_stream(seed: int, start: int, count: int) -> np.ndarray:
    """Values [start, start+count) of the seed's stream, vectorized."""
    with np.errstate(over="ignore"):
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        z = np.uint64(seed & _MASK) + idx * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))


def resample_indices(seed: int, n: int, n_boot: int) -> np.ndarray:
    """(n_boot, n) with-replacement index matrix; replicate r owns
    stream block [r*n, (r+1)*n)."""
    vals = u64_stream(seed, 0, n_boot * n)
    return (vals % np.uint64(n)).astype(np.int64).reshape(n_boot, n)


def shuffle_in_place(items: list, rng: SplitMix64) -> None:
    """Fisher-Yates driven by the given stream."""
    for i in range(len(items) - 1, 0, -1):
        j = rng.next_below(i + 1)
        items[i], items[j] = items[j], items[i]
