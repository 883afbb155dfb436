# SPDX-License-Identifier: Apache-2.0

"""Deterministic random streams.

Every random draw in the toolkit goes through an :class:`RngStream`. Streams
are built on numpy's PCG64 generator, whose output is identical across
platforms for a given seed. Sub-streams are derived with ``seed XOR
stream_id`` so partial reruns can reproduce any stage in isolation.
"""

from typing import Sequence

import numpy as np

SEED_MASK = (1 << 64) - 1

# Stream identifiers for the seed splitting rule
STREAM_RENDER = 0x01
STREAM_ESTIMATE = 0x02
STREAM_CMA = 0x03
STREAM_SPLIT = 0x04
STREAM_SYNTHESIS = 0x05
STREAM_CORPUS = 0x06
STREAM_ITEM_BASE = 0x1000


class RngStream:
    """Seeded random stream (64-bit unsigned seed)."""

    def __init__(self, seed: int = 0):
        if seed < 0:
            raise ValueError(f"Seed must be non-negative, got {seed}")
        self.seed = int(seed) & SEED_MASK
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"

    def fork(self, stream_id: int) -> "RngStream":
        """Return an independent stream seeded with ``seed XOR stream_id``."""
        return RngStream(self.seed ^ (int(stream_id) & SEED_MASK))

    def item(self, index: int) -> "RngStream":
        """Sub-stream for the ``index``-th element of a collection."""
        return self.fork(STREAM_ITEM_BASE + index)

    def seeds(self, count: int) -> list[int]:
        """Draw ``count`` fresh 63-bit seeds."""
        return [int(s) for s in self._generator.integers(0, 2**63 - 1, size=count)]

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._generator.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._generator.normal(loc, scale, size)

    def standard_normal(self, size=None):
        return self._generator.standard_normal(size)

    def poisson(self, lam: float, size=None):
        return self._generator.poisson(lam, size)

    def integers(self, low: int, high: int, size=None):
        """Integers in ``[low, high)``."""
        return self._generator.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        return self._generator.choice(n, size=size, replace=replace)


def streams_for(seeds: Sequence[int]) -> list[RngStream]:
    """One stream per seed, in order."""
    return [RngStream(s) for s in seeds]
