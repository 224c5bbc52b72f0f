"""
Seedable, splittable random stream used by every stochastic operation.

Algorithm (fixed so traces are reproducible across platforms):
- bit generator: numpy PCG64 seeded through numpy.random.SeedSequence(seed)
- doubles are drawn in blocks of BLOCK_SIZE with Generator.random()
- an index below k is floor(u * k) for the next double u
- the stream for run k of an ensemble uses SeedSequence(entropy=master_seed, spawn_key=(k,))
"""

from bisect import bisect_right
from typing import List

import numpy as np

BLOCK_SIZE = 1024


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed for child stream `index` of `master_seed`."""
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    low, high = sequence.generate_state(2, dtype=np.uint32)
    return (int(high) << 32) | int(low)


class RandomStream:
    """A named random stream; all draws go through uniform()."""

    def __init__(self, seed: int, name: str = ""):
        self.seed = int(seed)
        self.name = name or f"seed-{self.seed}"
        self._generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))
        self._buffer: List[float] = []
        self._position = 0
        self.draws = 0

    @classmethod
    def for_run(cls, master_seed: int, index: int) -> "RandomStream":
        return cls(derive_seed(master_seed, index), name=f"{master_seed}/{index}")

    def uniform(self) -> float:
        """Next double in [0, 1)."""
        if self._position >= len(self._buffer):
            self._buffer = self._generator.random(BLOCK_SIZE).tolist()
            self._position = 0
        value = self._buffer[self._position]
        self._position += 1
        self.draws += 1
        return value

    def below(self, k: int) -> int:
        """Uniform integer in [0, k)."""
        if k <= 0:
            raise ValueError(f"below() needs a positive bound, got {k}")
        index = int(self.uniform() * k)
        # u * k can round up to k when u is within one ulp of 1
        return index if index < k else k - 1

    def choose_weighted(self, cumulative: List[float]) -> int:
        """Index i with probability proportional to cumulative[i] - cumulative[i-1]."""
        target = self.uniform() * cumulative[-1]
        return min(bisect_right(cumulative, target), len(cumulative) - 1)
