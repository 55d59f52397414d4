"""
Cure-Fraction Survival Model

This module provides the cure-fraction Weibull regression example: simulated
censoring times and correlated covariates, the per-individual mixed-type
target, the prior over theta = (pi, gamma, beta0, beta) and the prior
predictive sampler for the observed time Y_n in (0, C_n].

The module includes:
- SurvivalData / generate_survival_data: censoring times and covariate rows
- survival_target: 0.95 truncated lognormal plus a 0.05 atom at C_n
- SurvivalPrior: draws and closed-form marginal SDs of theta
- SurvivalPredictiveSampler: cured draws emit C_n, uncured Weibull times are censored at C_n
- survival_bounds: the hyperparameter box Lambda

Hyperparameter order:
    alpha, beta (gamma ~ Gamma(alpha, rate beta)), mu0, sigma0 (beta0 ~ Normal),
    s_beta, omega_1..omega_K (partial correlations), eta_1..eta_B (slant),
    a_pi, b_pi (pi ~ Beta), with K = B(B-1)/2.
"""
from dataclasses import dataclass
from typing import Dict, Tuple
import logging

import numpy as np

from distributions import families
from distributions.families import MixtureSpec
from distributions.multivariate import (
    lkj_partial_to_cholesky,
    sample_lkj_cholesky,
    sample_mv_skew_normal,
    skew_normal_marginal_sd,
)
from distributions.rng import RngLike, as_generator
from optimizer.bounds import Bounds
from services.discrepancy import SamplerError
from targets.target import CovariateRow, Support, TargetSet, TargetSpec

logger = logging.getLogger(__name__)

CURE_MASS = 0.05
TARGET_LOG_LOCATION = np.log(3.0)
TARGET_LOG_SCALE = 2.0 / 3.0
CENSORING_OFFSET = 20.0
COVARIATE_LKJ_ETA = 5.0
BOUND_EPSILON = 1e-4
CENSORING_KEY = "censoring_time"


@dataclass(frozen=True)
class SurvivalData:
    """
    Attributes:
        censoring_times (np.ndarray): C_n for each individual.
        covariates (np.ndarray): N x B marginally standardized, correlated covariates.
        correlation_cholesky (np.ndarray): Cholesky factor of the covariate correlation.
    """

    censoring_times: np.ndarray
    covariates: np.ndarray
    correlation_cholesky: np.ndarray

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]

    def rows(self) -> Tuple[CovariateRow, ...]:
        return tuple(
            CovariateRow(x, {CENSORING_KEY: float(c)}, key=n)
            for n, (c, x) in enumerate(zip(self.censoring_times, self.covariates))
        )


def generate_survival_data(n_individuals: int, n_covariates: int, rng: RngLike) -> SurvivalData:
    """C_n ~ 20 + Exp(1); x_n ~ MultiNormal(0, Q) with a single Q ~ LKJ(5)."""
    if n_individuals < 1 or n_covariates < 1:
        raise ValueError("need at least one individual and one covariate")
    gen = as_generator(rng)
    censoring = CENSORING_OFFSET + gen.exponential(1.0, size=n_individuals)
    chol = sample_lkj_cholesky(n_covariates, COVARIATE_LKJ_ETA, gen)
    covariates = gen.standard_normal(size=(n_individuals, n_covariates)) @ chol.T
    return SurvivalData(censoring, covariates, chol)


def survival_target(censoring_time: float) -> TargetSpec:
    """T(y | C) = 0.95 LogNormal(y; log 3, 2/3) / Z + 0.05 1{y = C} on (0, C]."""
    if not censoring_time > 0:
        raise ValueError(f"censoring time must be > 0, got {censoring_time}")
    c = float(censoring_time)
    continuous = families.lognormal(TARGET_LOG_LOCATION, TARGET_LOG_SCALE, upper=c)
    dist = MixtureSpec(components=((1.0 - CURE_MASS, continuous),), atoms=((CURE_MASS, c),))
    return TargetSpec(dist, Support.bounded(c, (c,)), label=f"cure target C={c:.4f}")


def survival_targets(data: SurvivalData) -> TargetSet:
    rows = data.rows()
    return TargetSet.from_rows(rows, [survival_target(row[CENSORING_KEY]) for row in rows])


def n_partials(n_covariates: int) -> int:
    return n_covariates * (n_covariates - 1) // 2


def hyperparameter_names(n_covariates: int) -> Tuple[str, ...]:
    return (
        ("alpha", "beta", "mu0", "sigma0", "s_beta")
        + tuple(f"omega{k + 1}" for k in range(n_partials(n_covariates)))
        + tuple(f"eta{b + 1}" for b in range(n_covariates))
        + ("a_pi", "b_pi")
    )


def survival_bounds(n_covariates: int = 4) -> Bounds:
    eps = BOUND_EPSILON
    pairs = [
        ("alpha", eps, 20.0),
        ("beta", eps, 20.0),
        ("mu0", -10.0, 10.0),
        ("sigma0", eps, 10.0),
        ("s_beta", eps, 10.0),
    ]
    pairs += [(f"omega{k + 1}", -1.0 + eps, 1.0 - eps) for k in range(n_partials(n_covariates))]
    pairs += [(f"eta{b + 1}", -5.0, 5.0) for b in range(n_covariates)]
    pairs += [("a_pi", 1.0, 50.0), ("b_pi", 1.0, 50.0)]
    return Bounds.from_pairs(pairs)


class SurvivalPrior:
    """
    pi ~ Beta(a_pi, b_pi), gamma ~ Gamma(alpha, beta), beta0 ~ Normal(mu0, sigma0^2),
    beta ~ MVSkewNormal(0, S, eta) with S = diag(s_beta) Omega diag(s_beta).
    """

    def __init__(self, n_covariates: int = 4):
        self.n_covariates = n_covariates
        self.names = hyperparameter_names(n_covariates)

    def unpack(self, lam) -> Dict[str, object]:
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (len(self.names),):
            raise ValueError(f"expected {len(self.names)} survival hyperparameters, got shape {lam.shape}")
        k = n_partials(self.n_covariates)
        b = self.n_covariates
        return {
            "alpha": lam[0],
            "beta": lam[1],
            "mu0": lam[2],
            "sigma0": lam[3],
            "s_beta": lam[4],
            "omega": lam[5:5 + k],
            "eta": lam[5 + k:5 + k + b],
            "a_pi": lam[5 + k + b],
            "b_pi": lam[6 + k + b],
        }

    def scale_matrix(self, params) -> np.ndarray:
        chol = lkj_partial_to_cholesky(params["omega"])
        return params["s_beta"] ** 2 * (chol @ chol.T)

    def draw(self, lam, n: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        params = self.unpack(lam)
        gen = as_generator(rng)
        return {
            "pi": gen.beta(params["a_pi"], params["b_pi"], size=n),
            "gamma": gen.gamma(params["alpha"], 1.0 / params["beta"], size=n),
            "beta0": gen.normal(params["mu0"], params["sigma0"], size=n),
            "beta": sample_mv_skew_normal(self.scale_matrix(params), params["eta"], n, gen),
        }

    def analytic_sd(self, lam) -> Dict[str, np.ndarray]:
        params = self.unpack(lam)
        return {
            "pi": families.standard_deviation(families.beta(params["a_pi"], params["b_pi"])),
            "gamma": np.sqrt(params["alpha"]) / params["beta"],
            "beta0": params["sigma0"],
            "beta": skew_normal_marginal_sd(self.scale_matrix(params), params["eta"]),
        }


class SurvivalPredictiveSampler:
    """
    Prior predictive draws of Y_n for one individual.

    With probability pi an individual is cured and Y_n = C_n; otherwise the
    Weibull time T solving exp(-T^gamma exp(beta0 + x beta)) = U is drawn by
    inversion and Y_n = min(T, C_n).
    """

    def __init__(self, prior: SurvivalPrior):
        self.prior = prior

    def __call__(self, lam, row: CovariateRow, n: int, rng: np.random.Generator) -> np.ndarray:
        draws = self.prior.draw(lam, n, rng)
        return uncured_or_censored(draws, row.values, row[CENSORING_KEY], rng)


def uncured_or_censored(draws: Dict[str, np.ndarray], x: np.ndarray, censoring_time: float,
                        rng: np.random.Generator) -> np.ndarray:
    n = draws["pi"].size
    linear = draws["beta0"] + draws["beta"] @ np.asarray(x, dtype=float)
    if not np.all(np.isfinite(linear)):
        bad = int(np.flatnonzero(~np.isfinite(linear))[0])
        raise SamplerError(
            "non-finite linear predictor; theta = "
            f"(pi={draws['pi'][bad]:g}, gamma={draws['gamma'][bad]:g}, "
            f"beta0={draws['beta0'][bad]:g}, beta={draws['beta'][bad]})"
        )
    gen = as_generator(rng)
    cured = gen.uniform(size=n) < draws["pi"]
    shape = np.maximum(draws["gamma"], np.finfo(float).tiny)
    with np.errstate(divide="ignore", over="ignore"):
        log_t = (np.log(gen.standard_exponential(size=n)) - linear) / shape
    log_c = np.log(censoring_time)
    uncured = np.where(log_t >= log_c, censoring_time, np.maximum(np.exp(np.minimum(log_t, log_c)), np.finfo(float).tiny))
    return np.where(cured, censoring_time, uncured)


def censored_fraction(draws: Dict[str, np.ndarray], x: np.ndarray, censoring_time: float) -> float:
    """E[pi + (1 - pi) S(C | theta)] over the supplied prior draws."""
    linear = draws["beta0"] + draws["beta"] @ np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        survival = np.exp(-np.exp(draws["gamma"] * np.log(censoring_time) + linear))
    return float(np.mean(draws["pi"] + (1.0 - draws["pi"]) * survival))
