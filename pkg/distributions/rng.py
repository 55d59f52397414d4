"""
Seedable random streams.

An RngState wraps a numpy Generator built from a SeedSequence. Child streams
are derived by appending integer keys to the spawn key, so the stream used for
covariate row r, replicate k or optimizer evaluation i depends only on the
seed and that key path, never on the order in which streams were created.
"""
from typing import Sequence, Union

import numpy as np


class RngState:
    """
    Splittable random state.

    Attributes:
        seed (int): Root entropy (any non-negative 64-bit integer).
        key (tuple[int, ...]): Spawn key path from the root.
        generator (np.random.Generator): The stream's generator; draws advance it.
    """

    def __init__(self, seed: int, key: Sequence[int] = ()):
        if int(seed) < 0:
            raise ValueError("seed must be a non-negative integer")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self.generator = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.key))

    def spawn(self, *key: int) -> "RngState":
        return RngState(self.seed, self.key + tuple(int(k) for k in key))

    def __repr__(self):
        return f"RngState(seed={self.seed}, key={self.key})"


RngLike = Union[RngState, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngState):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngState or numpy Generator, got {type(rng).__name__}")
