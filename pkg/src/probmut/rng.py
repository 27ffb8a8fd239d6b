"""Deterministic, splittable random streams.

Every random draw in the package flows through a ``Stream``, a node in a
tree keyed by (master_seed, path). Substreams derived with ``split(i)``
depend only on the path, never on call order, so serial and parallel
execution over the same indices produce identical results.
"""

from __future__ import annotations

import numpy as np


class Stream:
    __slots__ = ("master_seed", "path")

    def __init__(self, master_seed: int, path: tuple[int, ...] = ()):
        self.master_seed = int(master_seed)
        self.path = tuple(int(p) for p in path)

    def split(self, index: int) -> "Stream":
        """Child stream for task `index`; independent of siblings and parent."""
        return Stream(self.master_seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        """Fresh counter-based generator for this node."""
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))

    def __repr__(self) -> str:
        return f"Stream(master_seed={self.master_seed}, path={self.path})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Stream)
            and self.master_seed == other.master_seed
            and self.path == other.path
        )

    def __hash__(self) -> int:
        return hash((self.master_seed, self.path))
