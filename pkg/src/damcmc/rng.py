"""Seeded, splittable random streams.

Every sampler in the package takes a :class:`numpy.random.Generator`.
:class:`RngStream` is the reproducible way to obtain one: the pair
``(seed, stream_id)`` always yields the same bit stream, and different
``stream_id`` values yield independent streams (via ``SeedSequence``
spawn keys).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def spawn(self, n: int) -> list:
        """``n`` generators independent of this stream and of each other."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return [np.random.Generator(np.random.PCG64(c)) for c in ss.spawn(n)]


def make_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    return RngStream(seed, stream_id).generator()
