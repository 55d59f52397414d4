"""
Evaluated designs and the weighted subsampling used to carry them between stages.

A Design holds lambda rows with their log D and (possibly missing) N values.
Rows closer than 1e-12 in every coordinate are merged by averaging their
objectives, so surrogate fits never see duplicated inputs.
"""
from dataclasses import dataclass
from typing import Callable, Optional
import logging

import numpy as np
from scipy.spatial.distance import pdist, squareform

from distributions.rng import RngLike, as_generator
from optimizer.bounds import Bounds, latin_hypercube
from utils.log_utils import log_softmax

logger = logging.getLogger(__name__)

DUPLICATE_TOLERANCE = 1e-12

WEIGHT_SCALES = ("neg_D", "neg_log_D")


@dataclass(frozen=True)
class Design:
    """
    Attributes:
        lam (np.ndarray): n x L evaluated hyperparameters.
        log_d (np.ndarray): log D at each row.
        n_value (np.ndarray): N at each row; nan where not yet evaluated.
    """

    lam: np.ndarray
    log_d: np.ndarray
    n_value: np.ndarray

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        log_d = np.asarray(self.log_d, dtype=float).ravel()
        n_value = np.asarray(self.n_value, dtype=float).ravel()
        if not (lam.shape[0] == log_d.size == n_value.size):
            raise ValueError(f"design has {lam.shape[0]} rows but {log_d.size} log_D and {n_value.size} N values")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "log_d", log_d)
        object.__setattr__(self, "n_value", n_value)

    @classmethod
    def build(cls, lam, log_d, n_value=None) -> "Design":
        """Construct and merge duplicate rows."""
        lam = np.atleast_2d(np.asarray(lam, dtype=float))
        if n_value is None:
            n_value = np.full(lam.shape[0], np.nan)
        return cls(lam, log_d, n_value).merged()

    @classmethod
    def empty(cls, dim: int) -> "Design":
        return cls(np.zeros((0, dim)), np.zeros(0), np.zeros(0))

    def __len__(self) -> int:
        return self.log_d.size

    @property
    def has_secondary(self) -> np.ndarray:
        return ~np.isnan(self.n_value)

    def subset(self, idx) -> "Design":
        idx = np.asarray(idx, dtype=int)
        return Design(self.lam[idx], self.log_d[idx], self.n_value[idx])

    def append(self, other: "Design") -> "Design":
        if len(self) == 0:
            return other.merged()
        return Design.build(
            np.vstack([self.lam, other.lam]),
            np.concatenate([self.log_d, other.log_d]),
            np.concatenate([self.n_value, other.n_value]),
        )

    def merged(self) -> "Design":
        if len(self) < 2:
            return self
        close = squareform(pdist(self.lam, metric="chebyshev")) <= DUPLICATE_TOLERANCE
        groups = []
        assigned = np.zeros(len(self), dtype=bool)
        for i in range(len(self)):
            if not assigned[i]:
                members = np.flatnonzero(close[i] & ~assigned)
                assigned[members] = True
                groups.append(members)
        if len(groups) == len(self):
            return self
        logger.debug("merging %d duplicate design rows", len(self) - len(groups))
        n_value = []
        for g in groups:
            present = self.n_value[g][~np.isnan(self.n_value[g])]
            n_value.append(present.mean() if present.size else np.nan)
        return Design(
            np.array([self.lam[g[0]] for g in groups]),
            np.array([self.log_d[g].mean() for g in groups]),
            np.array(n_value),
        )

    def with_secondary(self, f_n: Callable[[np.ndarray], float]) -> "Design":
        """Evaluate N on the rows that lack it."""
        missing = np.flatnonzero(~self.has_secondary)
        if missing.size == 0:
            return self
        n_value = self.n_value.copy()
        for i in missing:
            n_value[i] = f_n(self.lam[i])
        return Design(self.lam, self.log_d, n_value)


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    if scores.size == 0:
        return scores
    scores = np.where(np.isnan(scores), -np.inf, scores)
    top = scores.max()
    if np.isposinf(top):
        # infinitely preferred rows share the mass
        scores = np.where(np.isposinf(scores), 0.0, -np.inf)
    elif np.isneginf(top):
        logger.warning("no row has a usable weight (%d rows); sampling them uniformly", scores.size)
        scores = np.zeros_like(scores)
    return log_softmax(scores)


def softmax_weights(values) -> np.ndarray:
    """
    exp(values - log_sum_exp(values)). NaN values get weight 0; when no value is
    finite or +inf the weights are uniform.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("softmax needs at least one value")
    return np.exp(_log_softmax(values))


def design_log_weights(log_d, weight_scale: str = "neg_D") -> np.ndarray:
    """Log sampling weights over rows: softmax of -D (neg_D) or of -log D (neg_log_D)."""
    log_d = np.asarray(log_d, dtype=float)
    if weight_scale == "neg_D":
        return _log_softmax(-np.exp(log_d))
    if weight_scale == "neg_log_D":
        return _log_softmax(-log_d)
    raise ValueError(f"unknown weight scale '{weight_scale}', expected one of {WEIGHT_SCALES}")


def weighted_subsample(log_weights, k: int, rng: RngLike) -> np.ndarray:
    """
    k indices drawn without replacement with probability proportional to the weights
    (Gumbel top-k), returned in selection order.
    """
    log_weights = np.asarray(log_weights, dtype=float)
    if not 0 <= k <= log_weights.size:
        raise ValueError(f"cannot draw {k} of {log_weights.size} rows without replacement")
    keys = log_weights + as_generator(rng).gumbel(size=log_weights.size)
    return np.argsort(-keys, kind="stable")[:k]


def pad_design(n_pad: int, bounds: Bounds, f_d, f_n: Optional[Callable], rng: RngLike) -> Design:
    """n_pad Latin hypercube rows evaluated through f_d (and f_n when given)."""
    if n_pad == 0:
        return Design.empty(bounds.dim)
    lam = latin_hypercube(n_pad, bounds, rng)
    log_d = np.array([f_d(x) for x in lam])
    n_value = np.array([f_n(x) for x in lam]) if f_n is not None else None
    return Design.build(lam, log_d, n_value)
