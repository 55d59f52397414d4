"""
Surrogate-assisted two-objective search (MSPOT) and inter-batch resampling.

Each iteration fits one GP per objective to the design, predicts both
objectives on a fresh Latin hypercube of N_new candidates, keeps the N_eval
candidates with the best non-dominated sorting rank (ties broken by larger
hypervolume contribution within the rank) and evaluates them. In
single-objective mode only the log D surrogate is fitted and candidates are
ranked by its mean.

Iteration i draws from rng.spawn(i), so a longer run repeats a shorter run's
iterations exactly.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple
import logging

import numpy as np

from constants.pbbo_constants import GP_NUGGET_FLOOR
from distributions.rng import RngState
from optimizer.bounds import Bounds, latin_hypercube
from optimizer.design import Design, design_log_weights, pad_design, weighted_subsample
from optimizer.gp_surrogate import GpFitError, GpSurrogate, fit_gp, gp_predict
from optimizer.pareto import ParetoFront, hypervolume_contribution, nds_rank, pareto_front, reference_point

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]

NUGGET_LADDER = (1.0, 1e2, 1e4)


class SearchMode(str, Enum):
    MULTI_OBJECTIVE = "multi_objective"
    SINGLE_OBJECTIVE = "single_objective"


@dataclass(frozen=True)
class MspotConfig:
    """
    Attributes:
        n_bo (int): Iterations per batch.
        n_new (int): Candidates screened through the surrogates each iteration.
        n_eval (int): Candidates evaluated each iteration.
        mode (SearchMode): Two objectives, or log D alone.
    """

    n_bo: int = 150
    n_new: int = 1000
    n_eval: int = 1
    mode: SearchMode = SearchMode.MULTI_OBJECTIVE

    def __post_init__(self):
        object.__setattr__(self, "mode", SearchMode(self.mode))
        if self.n_bo < 1 or self.n_new < 1 or self.n_eval < 1:
            raise ValueError("n_bo, n_new and n_eval must be >= 1")
        if self.n_eval > self.n_new:
            raise ValueError(f"n_eval ({self.n_eval}) must not exceed n_new ({self.n_new})")


@dataclass
class MspotStats:
    gp_retries: int = 0
    gp_fallbacks: int = 0


def fit_with_retry(lam, y, bounds: Bounds, rng: RngState, stats: MspotStats) -> Optional[GpSurrogate]:
    """Fit, inflating the nugget on failure; None once every nugget on the ladder has failed."""
    for k, factor in enumerate(NUGGET_LADDER):
        try:
            return fit_gp(lam, y, bounds, rng.spawn(k), nugget=GP_NUGGET_FLOOR * factor)
        except GpFitError as exc:
            stats.gp_retries += 1
            logger.warning("surrogate fit failed (%s); retrying with a larger nugget", exc)
    return None


def rank_candidates(mean_d: np.ndarray, mean_n: Optional[np.ndarray]) -> np.ndarray:
    """Candidate order: by NDS rank, then by decreasing hypervolume contribution within a rank."""
    if mean_n is None:
        return np.argsort(mean_d, kind="stable")
    points = np.column_stack([mean_d, mean_n])
    ranks = nds_rank(points)
    contribution = np.zeros(points.shape[0])
    ref = reference_point(points)
    for rank in np.unique(ranks):
        members = np.flatnonzero(ranks == rank)
        contribution[members] = hypervolume_contribution(points[members], ref)
    return np.lexsort((-contribution, ranks))


def propose(design: Design, bounds: Bounds, cfg: MspotConfig, rng: RngState, stats: MspotStats) -> np.ndarray:
    candidates = latin_hypercube(cfg.n_new, bounds, rng.spawn(0))
    surrogate_d = fit_with_retry(design.lam, design.log_d, bounds, rng.spawn(1), stats)
    surrogate_n = None
    if cfg.mode is SearchMode.MULTI_OBJECTIVE and surrogate_d is not None:
        surrogate_n = fit_with_retry(design.lam, design.n_value, bounds, rng.spawn(2), stats)
        if surrogate_n is None:
            surrogate_d = None
    if surrogate_d is None:
        stats.gp_fallbacks += 1
        logger.warning("surrogates unavailable; evaluating %d random Latin hypercube candidates", cfg.n_eval)
        return candidates[:cfg.n_eval]
    mean_d, _ = gp_predict(surrogate_d, candidates)
    mean_n = gp_predict(surrogate_n, candidates)[0] if surrogate_n is not None else None
    return candidates[rank_candidates(mean_d, mean_n)[:cfg.n_eval]]


def mspot_batch(f_d: Objective, f_n: Objective, design: Design, cfg: MspotConfig, bounds: Bounds,
                rng: RngState, stats: Optional[MspotStats] = None) -> Tuple[Optional[ParetoFront], Design]:
    """
    Run cfg.n_bo surrogate iterations starting from design.

    Returns:
        tuple: (frontier of the evaluated design, or None in single-objective mode; evaluated design).
    """
    stats = stats if stats is not None else MspotStats()
    multi = cfg.mode is SearchMode.MULTI_OBJECTIVE
    if multi and not design.has_secondary.all():
        raise ValueError("every design row needs N before a two-objective batch")
    for i in range(cfg.n_bo):
        chosen = propose(design, bounds, cfg, rng.spawn(i), stats)
        log_d = np.array([f_d(x) for x in chosen])
        n_value = np.array([f_n(x) for x in chosen]) if multi else None
        design = design.append(Design.build(chosen, log_d, n_value))
        if (i + 1) % max(1, cfg.n_bo // 10) == 0:
            logger.info("MSPOT iteration %d/%d: best log_D %.4f over %d rows", i + 1, cfg.n_bo, design.log_d.min(), len(design))
    front = pareto_front(design, bounds.names) if multi else None
    return front, design


def resample_batch(front, evaluated: Design, n_design: int, n_pad: int, bounds: Bounds,
                   f_d: Objective, f_n: Objective, rng: RngState, weight_scale: str = "neg_D") -> Design:
    """
    Next batch's starting design: the frontier, max(n_design - |front|, 0) rows
    sampled from the rest of the evaluated design by softmax weights, and n_pad
    Latin hypercube rows evaluated on both objectives.

    In single-objective mode front is a Design holding the retained best rows
    and f_n may be None.
    """
    on_front = np.zeros(len(evaluated), dtype=bool)
    for x in front.lam:
        on_front |= np.all(np.abs(evaluated.lam - x) <= 1e-12, axis=1)
    rest = evaluated.subset(np.flatnonzero(~on_front))
    n_extra = min(max(n_design - len(front), 0), len(rest))
    design = front.as_design() if isinstance(front, ParetoFront) else front
    if n_extra:
        idx = weighted_subsample(design_log_weights(rest.log_d, weight_scale), n_extra, rng.spawn(0))
        design = design.append(rest.subset(idx))
    return design.append(pad_design(n_pad, bounds, f_d, f_n, rng.spawn(1)))
