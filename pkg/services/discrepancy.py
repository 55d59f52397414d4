"""
Predictive Discrepancy

This module estimates log D(lambda | X), the log of the average over covariate
rows of the integrated CvM or AD distance between the prior predictive CDF and
the elicited target CDF. For each row the predictive CDF is replaced by the ECDF
of S_r prior predictive draws and the integral by an importance-sampling average
over I_r proposal points; everything is kept on the log scale.

The module includes:
- DiscrepancyKind: CvM or AD
- DiscrepancyConfig: per-evaluation budgets and switches
- DiscrepancyEstimate: log_D plus per-row diagnostics
- log_cvm_term, log_ad_term: pointwise log distances
- DiscrepancyEvaluator / log_total_discrepancy: the full estimator

Random streams:
    Row r uses rng.spawn(row.key), split into predictive (0), target (1) and
    proposal (2) streams, so results do not depend on row order or on whether
    rows run in parallel.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Tuple
import logging

import numpy as np
from joblib import Parallel, delayed

from constants.pbbo_constants import IMPORTANCE_WIDENING, LOG_FLOOR
from distributions import families
from distributions.rng import RngState
from services.ecdf import build_ecdf
from services.importance import ImportanceProposal, proposal_log_mass, sample_proposal, select_proposal
from targets.target import CovariateRow, TargetSet, TargetSpec
from utils.log_utils import log1mexp, log_abs_diff_exp, log_mean_exp, log_sum_exp

logger = logging.getLogger(__name__)

# (lambda, covariate row, n, generator) -> n predictive draws
PredictiveSampler = Callable[[np.ndarray, CovariateRow, int, np.random.Generator], np.ndarray]

PREDICTIVE_STREAM, TARGET_STREAM, PROPOSAL_STREAM = 0, 1, 2


class SamplerError(RuntimeError):
    """A predictive sampler returned non-finite or misshapen draws."""


class DiscrepancyKind(str, Enum):
    CVM = "cvm"
    AD = "ad"


@dataclass(frozen=True)
class DiscrepancyConfig:
    """
    Attributes:
        kind (DiscrepancyKind): CvM or AD (AD falls back to CvM pointwise when unstable).
        n_predictive (int): S_r, predictive and target draws per row.
        n_importance (int): I_r, proposal points per row.
        widening (float): Importance widening factor c.
        importance_kind (str): 'auto' or 'uniform'.
        cache_target_samples (bool): Draw target samples once per row instead of per evaluation.
        floor (float): Log value returned for an exactly-zero pointwise distance.
        r_jobs (int): joblib workers across covariate rows (1 runs inline).
    """

    kind: DiscrepancyKind = DiscrepancyKind.CVM
    n_predictive: int = 10_000
    n_importance: int = 5_000
    widening: float = IMPORTANCE_WIDENING
    importance_kind: str = "auto"
    cache_target_samples: bool = False
    floor: float = LOG_FLOOR
    r_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", DiscrepancyKind(self.kind))
        if self.n_predictive < 1 or self.n_importance < 1:
            raise ValueError("n_predictive and n_importance must be >= 1")
        if self.widening < 1:
            raise ValueError(f"widening must be >= 1, got {self.widening}")


@dataclass(frozen=True)
class DiscrepancyEstimate:
    """
    Attributes:
        log_D (float): -log R + log_sum_exp(per_covariate), or the floor when every term is -inf.
        per_covariate (np.ndarray): Per-row log mean of the point terms.
        n_fallbacks (int): AD point terms that reverted to CvM.
        ess (np.ndarray): Importance effective sample size per row.
        n_degenerate (int): Rows whose proposal needed a degenerate-moment or shape clamp.
    """

    log_D: float
    per_covariate: np.ndarray
    n_fallbacks: int = 0
    ess: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_degenerate: int = 0

    def diagnostics(self) -> Dict[str, object]:
        return {
            "log_D": self.log_D,
            "per_covariate": [float(v) for v in self.per_covariate],
            "n_fallbacks": self.n_fallbacks,
            "ess": [float(v) for v in self.ess],
            "n_degenerate": self.n_degenerate,
        }


def log_cvm_term(p_hat, lcdf_t, floor: float = LOG_FLOOR) -> np.ndarray:
    """
    2 log|p_hat - exp(lcdf_t)|, evaluated as a log-space subtraction so tiny
    target CDF values never underflow to zero first. An exactly-zero difference
    returns the floor.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    with np.errstate(divide="ignore"):
        log_p = np.log(p_hat)
    diff = log_abs_diff_exp(log_p, lcdf_t)
    return np.where(np.isneginf(diff), floor, 2.0 * diff)


def log_ad_term(p_hat, lcdf_t, floor: float = LOG_FLOOR) -> Tuple[np.ndarray, np.ndarray]:
    """
    log_cvm_term - log T - log(1 - T), with log(1 - T) = log1mexp(-log T).

    Returns:
        tuple[np.ndarray, np.ndarray]: The terms, and a mask of points that fell back to CvM
        because the weight was not finite (T at 0 or 1).
    """
    lcdf_t = np.asarray(lcdf_t, dtype=float)
    cvm = log_cvm_term(p_hat, lcdf_t, floor)
    with np.errstate(invalid="ignore", over="ignore"):
        ad = cvm - lcdf_t - log1mexp(-lcdf_t)
    fallback = ~np.isfinite(ad)
    return np.where(fallback, cvm, ad), fallback


def _log_ess(log_w: np.ndarray) -> float:
    if np.all(np.isneginf(log_w)):
        return 0.0
    return float(np.exp(2.0 * log_sum_exp(log_w) - log_sum_exp(2.0 * log_w)))


class DiscrepancyEvaluator:
    """
    Callable estimator of log D(lambda | X) for a fixed target set and predictive sampler.

    Attributes:
        targets (TargetSet): The elicited targets.
        sampler (PredictiveSampler): Prior predictive sampler.
        config (DiscrepancyConfig): Budgets and switches.
        base_rng (Optional[RngState]): Run-level stream used for cached target samples.
    """

    def __init__(self, targets: TargetSet, sampler: PredictiveSampler, config: DiscrepancyConfig,
                 base_rng: Optional[RngState] = None):
        self.targets = targets
        self.sampler = sampler
        self.config = config
        self.base_rng = base_rng
        self._target_cache: Dict[int, np.ndarray] = {}
        if config.cache_target_samples:
            if base_rng is None:
                raise ValueError("cached target samples need a run-level RngState")
            for r in range(targets.R):
                row, target = targets.pairs[r]
                stream = base_rng.spawn(row.key, TARGET_STREAM)
                self._target_cache[row.key] = target.sample(config.n_predictive, stream)

    def __call__(self, lam, rng: RngState) -> DiscrepancyEstimate:
        return self.evaluate(lam, rng)

    def evaluate(self, lam, rng: RngState) -> DiscrepancyEstimate:
        lam = np.asarray(lam, dtype=float)
        if self.config.r_jobs == 1 or self.targets.R == 1:
            rows = [self._evaluate_row(lam, r, rng) for r in range(self.targets.R)]
        else:
            rows = Parallel(n_jobs=self.config.r_jobs)(
                delayed(self._evaluate_row)(lam, r, rng) for r in range(self.targets.R)
            )
        per_covariate = np.array([row[0] for row in rows])
        n_fallbacks = int(sum(row[1] for row in rows))
        ess = np.array([row[2] for row in rows])
        n_degenerate = int(sum(row[3] for row in rows))
        if np.all(np.isneginf(per_covariate)):
            logger.warning("every discrepancy point term is -inf at lambda=%s; returning the floor", lam)
            log_d = self.config.floor
        else:
            log_d = float(log_sum_exp(per_covariate) - np.log(self.targets.R))
        if n_fallbacks:
            logger.debug("%d AD point terms reverted to CvM", n_fallbacks)
        return DiscrepancyEstimate(log_d, per_covariate, n_fallbacks, ess, n_degenerate)

    def _evaluate_row(self, lam: np.ndarray, r: int, rng: RngState):
        row, target = self.targets.pairs[r]
        row_rng = rng.spawn(row.key)
        cfg = self.config

        y_p = np.asarray(self.sampler(lam, row, cfg.n_predictive, row_rng.spawn(PREDICTIVE_STREAM).generator), dtype=float)
        if y_p.shape != (cfg.n_predictive,) or not np.all(np.isfinite(y_p)):
            bad = int(np.sum(~np.isfinite(y_p))) if y_p.size else 0
            raise SamplerError(
                f"predictive sampler failed for covariate row {r} (key {row.key}): "
                f"shape {y_p.shape}, {bad} non-finite draws"
            )
        ecdf = build_ecdf(y_p)
        y_t = self._target_samples(row, target, row_rng)
        proposal = select_proposal(target.support, y_p, y_t, cfg.widening, cfg.importance_kind)
        y_i = sample_proposal(proposal, cfg.n_importance, row_rng.spawn(PROPOSAL_STREAM))

        z, n_fallbacks, log_w = point_terms(ecdf.eval(y_i), y_i, target, proposal, cfg)
        return log_mean_exp(z), n_fallbacks, _log_ess(log_w), int(proposal.degenerate or proposal.clamped)

    def _target_samples(self, row: CovariateRow, target: TargetSpec, row_rng: RngState) -> np.ndarray:
        if self.config.cache_target_samples:
            return self._target_cache[row.key]
        return target.sample(self.config.n_predictive, row_rng.spawn(TARGET_STREAM))


def point_terms(p_hat, y, target: TargetSpec, proposal: ImportanceProposal, cfg: DiscrepancyConfig):
    """
    z(y) = log d(P_hat(y), T(y)) + log t(y) - log q(y); at proposal atoms both t and q
    are point masses.

    Returns:
        tuple: (z, number of AD fallbacks, log importance weights log t - log q).
    """
    lcdf_t = target.log_cdf(y)
    if cfg.kind is DiscrepancyKind.AD:
        log_d, fallback = log_ad_term(p_hat, lcdf_t, cfg.floor)
        n_fallbacks = int(fallback.sum())
    else:
        log_d, n_fallbacks = log_cvm_term(p_hat, lcdf_t, cfg.floor), 0

    q_mass = proposal_log_mass(proposal, y)
    at_atom = np.isfinite(q_mass)
    log_q = np.where(at_atom, q_mass, families.log_continuous_density(proposal.mixture, y))
    log_t = np.where(at_atom, target.log_mass(y), target.log_continuous_density(y))
    with np.errstate(invalid="ignore"):
        log_w = np.where(np.isneginf(log_q) | np.isneginf(log_t), -np.inf, log_t - log_q)
    return log_d + log_w, n_fallbacks, log_w


def log_total_discrepancy(lam, targets: TargetSet, sampler: PredictiveSampler, cfg: DiscrepancyConfig,
                          rng: RngState) -> DiscrepancyEstimate:
    return DiscrepancyEvaluator(targets, sampler, cfg, rng).evaluate(lam, rng)
