"""
Hyperparameter box Lambda and space-filling designs over it.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple
import logging

import numpy as np
from scipy.stats import qmc

from distributions.rng import RngLike, as_generator

logger = logging.getLogger(__name__)


class OutOfBoundsError(ValueError):
    """The optimizer asked for a lambda outside Lambda."""


@dataclass(frozen=True)
class Bounds:
    """
    Attributes:
        names (tuple[str, ...]): Hyperparameter names, in lambda order.
        lower (np.ndarray): Lower limits.
        upper (np.ndarray): Upper limits, each strictly above its lower limit.
    """

    names: Tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        names = tuple(self.names)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "names", names)
        if not (lower.shape == upper.shape == (len(names),)):
            raise ValueError(f"got {len(names)} names, {lower.size} lower and {upper.size} upper limits")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        bad = [n for n, lo, hi in zip(names, lower, upper) if not lo < hi]
        if bad:
            raise ValueError(f"lower must be < upper for {bad}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[str, float, float]]) -> "Bounds":
        names, lower, upper = zip(*pairs)
        return cls(tuple(names), np.array(lower), np.array(upper))

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        return np.all((lam >= self.lower) & (lam <= self.upper), axis=-1)

    def check(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if lam.shape[-1] != self.dim or not np.all(self.contains(lam)):
            raise OutOfBoundsError(f"lambda {lam} lies outside {dict(zip(self.names, zip(self.lower, self.upper)))}")
        return lam

    def clip(self, lam) -> np.ndarray:
        return np.clip(lam, self.lower, self.upper)

    def to_unit(self, lam) -> np.ndarray:
        return (np.asarray(lam, dtype=float) - self.lower) / self.width

    def from_unit(self, u) -> np.ndarray:
        # clip guards against lower + width * 1.0 rounding past upper
        return self.clip(self.lower + np.asarray(u, dtype=float) * self.width)

    def uniform(self, n: int, rng: RngLike) -> np.ndarray:
        return self.from_unit(as_generator(rng).uniform(size=(n, self.dim)))


def latin_hypercube(n: int, bounds: Bounds, rng: RngLike) -> np.ndarray:
    """n points, one per 1/n stratum in every dimension, jittered uniformly within strata."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sampler = qmc.LatinHypercube(d=bounds.dim, seed=as_generator(rng))
    return bounds.from_unit(sampler.random(n))
