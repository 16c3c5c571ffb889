"""Buffered uniform variates shared by both kernel implementations.

Kernels pull one block of uniforms at a time from a numpy Generator and
consume them in a fixed order (two per event).  Because the stream object
persists across kernel calls, a trajectory depends only on the generator
state, not on how the run is chunked, and the compiled and pure-Python
kernels consume identically and therefore agree move for move.
"""

from __future__ import annotations

import numpy as np

RAND_BLOCK = 1 << 16


class UniformStream:
    """A block-buffered stream of uniform [0, 1) doubles."""

    __slots__ = ("rng", "buf", "i", "block")

    def __init__(self, rng: np.random.Generator, block: int = RAND_BLOCK):
        self.rng = rng
        self.block = block
        self.buf = np.empty(0, dtype=np.float64)
        self.i = 0

    def refill(self) -> np.ndarray:
        self.buf = self.rng.random(self.block)
        self.i = 0
        return self.buf

    def next(self) -> float:
        if self.i >= self.buf.size:
            self.refill()
        v = self.buf[self.i]
        self.i += 1
        return float(v)


def replica_rng(master_seed: int, replica: int = 0) -> np.random.Generator:
    """Counter-based generator for replica `replica` of a seeded ensemble.

    The (master_seed, replica) pair fully determines the stream, and
    distinct replicas get statistically independent streams, so parallel
    ensembles reduce in a fixed order regardless of scheduling.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(replica,))
    return np.random.Generator(np.random.Philox(ss))
