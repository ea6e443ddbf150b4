"""Deterministic random streams.

Everything stochastic in the toolkit draws from an `Rng`, which wraps numpy's
PCG64 behind a fixed seed. The same seed always yields the same sample stream,
and `child()` derives independent substreams from a structured key so that
per-speaker / per-utterance randomness does not depend on generation order.
"""

from __future__ import annotations

import numpy as np


class Rng:
    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.spawn_key = tuple(int(k) for k in spawn_key)
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.spawn_key))
        )

    def child(self, *key: int) -> "Rng":
        """Independent substream identified by `key`, stable across call order."""
        return Rng(self.seed, self.spawn_key + tuple(int(k) for k in key))

    def normal(self, shape=None, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
        return self._gen.normal(mean, std, size=shape)

    def uniform(self, low: float = 0.0, high: float = 1.0, shape=None) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def integers(self, low: int, high: int, shape=None):
        return self._gen.integers(low, high, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, spawn_key={self.spawn_key})"
