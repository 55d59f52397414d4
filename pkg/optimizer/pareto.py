"""
Two-objective Pareto utilities (both objectives minimized).

Functions:
    non_dominated_mask(points) -> np.ndarray:
        Kung sweep; exact duplicates of a non-dominated point are kept.
    pareto_front(design) -> ParetoFront:
        The non-dominated rows of a design that carry both objectives.
    nds_rank(points) -> np.ndarray:
        Non-dominated sorting ranks, 1 for the first front.
    hypervolume_contribution(points, ref) -> np.ndarray:
        Exclusive hypervolume of each point via the sorted 2-D sweep.
    reference_point(points) -> np.ndarray:
        Componentwise max plus HYPERVOLUME_MARGIN of the range.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from constants.pbbo_constants import HYPERVOLUME_MARGIN
from optimizer.design import Design


def _as_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError(f"expected an n x 2 array of objective pairs, got shape {points.shape}")
    return points


def dominates(a, b) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    return bool(np.all(a <= b) and np.any(a < b))


def non_dominated_mask(points) -> np.ndarray:
    points = _as_points(points)
    mask = np.zeros(points.shape[0], dtype=bool)
    if points.shape[0] == 0:
        return mask
    order = np.lexsort((points[:, 1], points[:, 0]))
    best_second = np.inf
    last_kept = None
    for i in order:
        if points[i, 1] < best_second:
            mask[i] = True
            best_second = points[i, 1]
            last_kept = points[i]
        elif last_kept is not None and np.array_equal(points[i], last_kept):
            mask[i] = True
    return mask


def nds_rank(points) -> np.ndarray:
    points = _as_points(points)
    if points.shape[0] == 0:
        raise ValueError("nds_rank needs at least one point")
    ranks = np.zeros(points.shape[0], dtype=int)
    remaining = np.arange(points.shape[0])
    rank = 1
    while remaining.size:
        front = non_dominated_mask(points[remaining])
        ranks[remaining[front]] = rank
        remaining = remaining[~front]
        rank += 1
    return ranks


def reference_point(points) -> np.ndarray:
    points = _as_points(points)
    hi = points.max(axis=0)
    span = hi - points.min(axis=0)
    margin = np.where(span > 0, HYPERVOLUME_MARGIN * span, HYPERVOLUME_MARGIN * np.maximum(np.abs(hi), 1.0))
    return hi + margin


def hypervolume_contribution(points, ref) -> np.ndarray:
    """
    Exclusive 2-D hypervolume of each point with respect to ref. Dominated points
    and exact duplicates contribute 0.

    Raises:
        ValueError: When a point does not strictly dominate ref.
    """
    points = _as_points(points)
    ref = np.asarray(ref, dtype=float)
    if not np.all(points < ref):
        raise ValueError(f"every point must dominate the reference point {ref}")
    contrib = np.zeros(points.shape[0])
    front = np.flatnonzero(non_dominated_mask(points))
    front = front[np.lexsort((points[front, 1], points[front, 0]))]
    unique, counts = np.unique(points[front], axis=0, return_counts=True)
    for k, i in enumerate(front):
        if counts[np.flatnonzero((unique == points[i]).all(axis=1))[0]] > 1:
            continue
        right = points[front[k + 1], 0] if k + 1 < front.size else ref[0]
        above = points[front[k - 1], 1] if k > 0 else ref[1]
        contrib[i] = (right - points[i, 0]) * (above - points[i, 1])
    return contrib


@dataclass(frozen=True)
class ParetoFront:
    """
    Non-dominated design rows.

    Attributes:
        lam (np.ndarray): Frontier hyperparameters, sorted by increasing log D.
        log_d (np.ndarray), n_value (np.ndarray): Their objective values.
        names (tuple[str, ...]): Hyperparameter names.
    """

    lam: np.ndarray
    log_d: np.ndarray
    n_value: np.ndarray
    names: Tuple[str, ...]

    def __post_init__(self):
        points = self.points
        if np.isnan(points).any():
            raise ValueError("frontier rows need both objectives")
        if not non_dominated_mask(points).all():
            raise ValueError("frontier contains a dominated point")

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.log_d, self.n_value])

    def __len__(self) -> int:
        return self.log_d.size

    def as_design(self) -> Design:
        return Design(self.lam, self.log_d, self.n_value)


def pareto_front(design: Design, names) -> ParetoFront:
    rows = np.flatnonzero(design.has_secondary)
    if rows.size == 0:
        raise ValueError("no design row carries both objectives")
    sub = design.subset(rows)
    keep = np.flatnonzero(non_dominated_mask(np.column_stack([sub.log_d, sub.n_value])))
    keep = keep[np.lexsort((sub.n_value[keep], sub.log_d[keep]))]
    return ParetoFront(sub.lam[keep], sub.log_d[keep], sub.n_value[keep], tuple(names))
