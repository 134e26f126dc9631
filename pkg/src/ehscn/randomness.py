"""Counter-addressed random streams.

All stochastic draws in this package are addressed by an integer path under
a root seed, e.g. ``(trial, purpose, node, slot)``.  A draw depends only on
the root seed and its address, never on call order, so trials can run in any
order or in parallel and still reproduce bit-identical results.
"""

from __future__ import annotations

import numpy as np

# Purpose labels used as the first path component below a trial.
PURPOSE_SCBS = 0
PURPOSE_USERS = 1
PURPOSE_GRID_MARKING = 2
PURPOSE_HARVEST = 3
PURPOSE_PHASE = 4


class RandomStream:
    """Hierarchical deterministic random source.

    ``child(*path)`` narrows the address; ``generator(*path)`` yields a fresh
    numpy Generator whose output is a pure function of (seed, full path).
    """

    __slots__ = ("seed", "path")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)

    def child(self, *path: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + path)

    def generator(self, *path: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path + path)
        return np.random.Generator(np.random.Philox(seq))

    def uniform(self, *path: int) -> float:
        """One float in [0, 1) addressed by the given path."""
        return float(self.generator(*path).random())

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, path={self.path})"
