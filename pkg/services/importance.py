"""
Importance Proposals

This module picks the importance distribution Q(Y | X_r) used to approximate the
discrepancy integral. The proposal is a two-component mixture fitted by moments
to the prior predictive draws and to the target draws, so that it covers the
mass of both; the component family follows the support of the observable:

    real line            0.5 Student-t5 + 0.5 Student-t5   (location mu, scale c * sqrt(v))
    positive half line   0.5 Gamma + 0.5 Gamma              (w = min(c^2 v, 1e5))
    bounded (0, a]       0.45 Beta + 0.45 Beta on Y / a      (w = max(c^2 v, 1e-6))
                         + 0.05 atom at a

The bounded weights are kept as stated on the proposal (nominal_weights); they
sum to 0.95, so the mixture that is sampled and evaluated rescales them to one
(0.45 / 0.95 each, 0.05 / 0.95 at the atom).

A fixed uniform proposal on (0, a) is available for bounded supports.

The module includes:
- ImportanceProposal: the fitted mixture plus the moment summaries it came from
- select_proposal: fit a proposal for one covariate row
- proposal_log_density / sample_proposal: evaluate and draw from a proposal
"""
from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np

from constants.pbbo_constants import (
    BETA_VARIANCE_FLOOR,
    BOUNDED_ATOM_WEIGHT,
    BOUNDED_COMPONENT_WEIGHT,
    GAMMA_VARIANCE_CAP,
    IMPORTANCE_WIDENING,
    MIN_BETA_SHAPE,
    MIN_PROPOSAL_VARIANCE,
    STUDENT_T_DF,
)
from distributions import families
from distributions.families import DistSpec, MixtureSpec
from distributions.rng import RngLike
from targets.target import Support, SupportKind

logger = logging.getLogger(__name__)

PROPOSAL_KINDS = ("auto", "uniform")


@dataclass(frozen=True)
class ImportanceProposal:
    """
    Attributes:
        mixture (MixtureSpec): The proposal distribution.
        support (Support): Support it was fitted for.
        widening (float): The widening factor c.
        moments (tuple[float, float, float, float]): (mean_P, var_P, mean_T, var_T);
            on a bounded support these are the moments of Y / a.
        degenerate (bool): A sample set had zero spread and a fixed minimum variance was used.
        clamped (bool): Beta shapes went non-positive and were clamped.
        nominal_weights (tuple[float, ...]): Weights as stated before rescaling,
            components then atoms; equal to the mixture weights unless rescaled.
    """

    mixture: MixtureSpec
    support: Support
    widening: float
    moments: Tuple[float, float, float, float]
    degenerate: bool = False
    clamped: bool = False
    nominal_weights: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.nominal_weights:
            object.__setattr__(self, "nominal_weights", tuple(float(w) for w in self.mixture.weights))


def _moments(samples: np.ndarray) -> Tuple[float, float]:
    ddof = 1 if samples.size > 1 else 0
    return float(np.mean(samples)), float(np.var(samples, ddof=ddof))


def _student_t(mean: float, var: float, c: float) -> DistSpec:
    return families.student_t(STUDENT_T_DF, mean, c * np.sqrt(var))


def _gamma(mean: float, var: float, c: float) -> DistSpec:
    if mean <= 0:
        raise ValueError(f"half-line proposal needs a positive sample mean, got {mean}")
    omega = min(c**2 * var, GAMMA_VARIANCE_CAP)
    return families.gamma(mean**2 / omega, mean / omega)


def _beta(mean: float, var: float, c: float, upper: float) -> Tuple[DistSpec, bool]:
    omega = max(c**2 * var, BETA_VARIANCE_FLOOR)
    mean = min(max(mean, np.finfo(float).tiny), 1.0)
    a = mean * (mean / omega * (1.0 - mean) - 1.0)
    b = (1.0 - mean) / mean * a
    clamped = not (a > MIN_BETA_SHAPE and b > MIN_BETA_SHAPE)
    return families.beta(max(a, MIN_BETA_SHAPE), max(b, MIN_BETA_SHAPE), upper), clamped


def select_proposal(
    support: Support,
    samples_p,
    samples_t,
    c: float = IMPORTANCE_WIDENING,
    kind: str = "auto",
) -> ImportanceProposal:
    """
    Fit the importance proposal for one covariate row.

    Args:
        support (Support): Support of the observable for this row.
        samples_p: Prior predictive draws.
        samples_t: Target draws.
        c (float): Widening factor, >= 1.
        kind (str): 'auto' for the moment-matched mixture, 'uniform' for Uniform(0, a)
            (bounded supports only).

    Returns:
        ImportanceProposal: The fitted proposal.

    Raises:
        ValueError: On empty sample sets, c < 1 or an unknown kind.
    """
    samples_p = np.asarray(samples_p, dtype=float).ravel()
    samples_t = np.asarray(samples_t, dtype=float).ravel()
    if samples_p.size == 0 or samples_t.size == 0:
        raise ValueError("both sample sets must be nonempty")
    if c < 1:
        raise ValueError(f"widening factor must be >= 1, got {c}")
    if kind not in PROPOSAL_KINDS:
        raise ValueError(f"unknown proposal kind '{kind}', expected one of {PROPOSAL_KINDS}")

    if kind == "uniform":
        return _uniform_proposal(support, c)

    scale = support.upper if support.kind is SupportKind.BOUNDED_INTERVAL else 1.0
    mean_p, var_p = _moments(samples_p / scale)
    mean_t, var_t = _moments(samples_t / scale)
    degenerate = var_p <= 0 or var_t <= 0
    if degenerate:
        logger.warning("zero-spread sample set (var_P=%g, var_T=%g); using minimum proposal variance", var_p, var_t)
        if support.kind is not SupportKind.BOUNDED_INTERVAL:
            var_p = var_p if var_p > 0 else MIN_PROPOSAL_VARIANCE
            var_t = var_t if var_t > 0 else MIN_PROPOSAL_VARIANCE

    clamped = False
    if support.kind is SupportKind.REAL_LINE:
        mixture = MixtureSpec(components=((0.5, _student_t(mean_p, var_p, c)), (0.5, _student_t(mean_t, var_t, c))))
    elif support.kind is SupportKind.POSITIVE_HALF_LINE:
        mixture = MixtureSpec(components=((0.5, _gamma(mean_p, var_p, c)), (0.5, _gamma(mean_t, var_t, c))))
    else:
        beta_p, clamped_p = _beta(mean_p, var_p, c, support.upper)
        beta_t, clamped_t = _beta(mean_t, var_t, c, support.upper)
        clamped = clamped_p or clamped_t
        if clamped:
            logger.warning("beta proposal shapes clamped to %g (means %g, %g)", MIN_BETA_SHAPE, mean_p, mean_t)
        nominal = (BOUNDED_COMPONENT_WEIGHT, BOUNDED_COMPONENT_WEIGHT, BOUNDED_ATOM_WEIGHT)
        mixture = MixtureSpec.normalized(
            components=((nominal[0], beta_p), (nominal[1], beta_t)),
            atoms=((nominal[2], support.upper),),
        )
        return ImportanceProposal(mixture, support, float(c), (mean_p, var_p, mean_t, var_t), degenerate, clamped,
                                  nominal)
    return ImportanceProposal(mixture, support, float(c), (mean_p, var_p, mean_t, var_t), degenerate, clamped)


def _uniform_proposal(support: Support, c: float) -> ImportanceProposal:
    if support.kind is not SupportKind.BOUNDED_INTERVAL:
        raise ValueError("a uniform proposal needs a bounded support")
    uniform = families.beta(1.0, 1.0, support.upper)
    if support.atoms:
        mixture = MixtureSpec(
            components=((1.0 - BOUNDED_ATOM_WEIGHT, uniform),),
            atoms=((BOUNDED_ATOM_WEIGHT, support.upper),),
        )
    else:
        mixture = MixtureSpec.single(uniform)
    return ImportanceProposal(mixture, support, float(c), (np.nan,) * 4)


def proposal_log_density(q: ImportanceProposal, y) -> np.ndarray:
    """Log density of the continuous part, log mass at the atom, -inf outside a bounded support."""
    y = np.asarray(y, dtype=float)
    out = families.log_density(q.mixture, y)
    if q.support.kind is SupportKind.BOUNDED_INTERVAL:
        out = np.where((y > 0) & (y <= q.support.upper), out, -np.inf)
    return out


def proposal_log_mass(q: ImportanceProposal, y) -> np.ndarray:
    return families.log_mass(q.mixture, y)


def sample_proposal(q: ImportanceProposal, n: int, rng: RngLike) -> np.ndarray:
    return families.sample(q.mixture, n, rng)
