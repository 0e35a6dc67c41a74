"""
Seeded, splittable random streams.

A RandomStream is a (seed, path) pair. Step t of a sampling pass reads
entry t of the uniform vector generated for (seed, path), so the value a
step sees never depends on how many other values were drawn elsewhere.
"""

from typing import Tuple

import numpy as np


class RandomStream:
    """
    Deterministic stream addressed by a spawn-key path.

    Args:
        seed: Non-negative integer entropy
        path: Spawn-key path identifying this stream
    """

    def __init__(self, seed: int, path: Tuple[int, ...] = ()):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)
        self.path = tuple(int(k) for k in path)

    def child(self, *key: int) -> "RandomStream":
        """Derive an independent stream one level further down the path."""
        return RandomStream(self.seed, self.path + tuple(key))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.path))

    def uniforms(self, count: int) -> np.ndarray:
        """Uniform variates for steps ``0..count-1``; entry t belongs to step t."""
        return self.generator().random(count)

    def uniform(self, step: int) -> float:
        """Uniform variate in [0, 1) owned by ``step``."""
        return float(self.uniforms(step + 1)[step])

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, path={self.path})"
