"""Reproducible random number streams.

All randomness in this package flows through `stream(master_seed, index)`:
a counter-based Philox generator keyed by the pair. Distinct indices give
statistically independent streams for one master seed, so Monte-Carlo
trials can be indexed by trial number and run in any order (or on any
number of threads) with identical results.
"""

from __future__ import annotations

import numpy as np

BLOCK = 8192


def stream(master_seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator number `index` of the family keyed by `master_seed`."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(seq))


class UniformBuffer:
    """Serves uniforms one at a time, drawing from the generator in blocks.

    Every consumer of per-step randomness uses this wrapper, so the number
    of variates consumed per simulated letter is exactly one regardless of
    the engine (comb fast path or generic tree walker), and traces are
    reproducible across engines.
    """

    def __init__(self, rng: np.random.Generator, block: int = BLOCK):
        self._rng = rng
        self._block = block
        self._buf = rng.random(block)
        self._pos = 0

    def next(self) -> float:
        if self._pos == self._block:
            self._buf = self._rng.random(self._block)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u
