"""
Empirical CDF of prior predictive draws.

An Ecdf keeps the sorted draws and evaluates the right-continuous step
function (#draws <= y) / S by binary search.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Ecdf:
    """
    Attributes:
        sorted_samples (np.ndarray): Draws sorted ascending.
    """

    sorted_samples: np.ndarray

    @property
    def size(self) -> int:
        return self.sorted_samples.size

    def eval(self, y) -> np.ndarray:
        counts = np.searchsorted(self.sorted_samples, np.asarray(y, dtype=float), side="right")
        return counts / self.size

    def __call__(self, y) -> np.ndarray:
        return self.eval(y)


def build_ecdf(samples) -> Ecdf:
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("cannot build an ECDF from an empty sample")
    if np.isnan(samples).any():
        raise ValueError("ECDF samples contain nan")
    return Ecdf(np.sort(samples, kind="stable"))
