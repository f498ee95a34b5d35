"""Deterministic, splittable random streams.

Built on numpy's counter-based Philox bit generator: the (seed, stream_id)
pair is the Philox key, so a stream is fully determined by those two
integers and parallel consumers can derive disjoint substreams without any
shared state.  Normal variates come from numpy's ziggurat transform.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
# splitmix64 increment; mixes substream indices into fresh stream ids
_GOLDEN = 0x9E3779B97F4A7C15


class SeededStream:
    """Reproducible random stream addressed by (seed, stream_id).

    Two streams built from the same pair emit byte-identical sequences;
    distinct stream_ids under one seed are statistically independent.
    Instances are cheap, and drawing advances only local state.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = self.seed | (self.stream_id << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self) -> str:
        return f"SeededStream(seed={self.seed}, stream_id={self.stream_id})"

    def substream(self, index: int) -> "SeededStream":
        """Derive an independent child stream; same index gives the same child."""
        mixed = (self.stream_id * _GOLDEN + int(index) + 1) & _MASK64
        return SeededStream(self.seed, mixed)

    def standard_normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def uniform(self, low: float, high: float, shape) -> np.ndarray:
        return self._gen.uniform(low, high, shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def standard_normal(stream: SeededStream, count: int) -> np.ndarray:
    """Draw `count` i.i.d. N(0, 1) variates from the stream."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    return stream.standard_normal(count)
