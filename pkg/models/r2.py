"""
Priors From the Coefficient of Determination

The linear model Y = X beta + eps with eps ~ Normal(0, sigma^2) and
sigma^2 ~ InverseGamma(a1, b1) induces a prior on

    R^2 = 1 - sigma^2 / (n^-1 beta' X' X beta + sigma^2)

for centered X. Three coefficient priors are supported:

    gaussian            beta_j ~ Normal(0, sigma^2 / gamma)                      lambda = (gamma, a1, b1)
    dirichlet_laplace   beta_j ~ Laplace(0, sigma phi_j tau), phi ~ Dir(alpha),
                        tau ~ Gamma(p alpha, rate 1/2)                           lambda = (alpha, a1, b1)
    horseshoe           c^2 ~ InvGamma(nu/2, nu s2/2), omega ~ C+(0, p0/(p-p0) sqrt(sigma^2/n)),
                        delta_j ~ C+(0, 1), beta_j ~ Normal(0, omega^2 dtilde_j^2)
                        with dtilde_j^2 = c^2 delta_j^2 / (c^2 + omega^2 delta_j^2)  lambda = (p0, nu, s2, a1, b1)

Targets are Beta(s1, s2) distributions on (0, 1).
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Tuple
import logging

import numpy as np
from scipy.special import expit

from distributions import families
from distributions.rng import RngLike, as_generator
from optimizer.bounds import Bounds
from services.discrepancy import SamplerError
from services.objectives import SecondaryConfig
from targets.target import CovariateRow, Support, TargetSpec

logger = logging.getLogger(__name__)

R2_UPPER = np.nextafter(1.0, 0.0)
TARGET_SHAPES = tuple(float(s) for s in np.exp(np.linspace(np.log(1.0 / 3.0), np.log(3.0), 4)))


class R2PriorKind(str, Enum):
    GAUSSIAN = "gaussian"
    DIRICHLET_LAPLACE = "dirichlet_laplace"
    HORSESHOE = "horseshoe"


HYPERPARAMETER_NAMES = {
    R2PriorKind.GAUSSIAN: ("gamma", "a1", "b1"),
    R2PriorKind.DIRICHLET_LAPLACE: ("alpha", "a1", "b1"),
    R2PriorKind.HORSESHOE: ("p0", "nu", "s2", "a1", "b1"),
}

# SD source per parameter block; blocks whose SD is undefined somewhere in Lambda use the robust scale
SD_SOURCES = {
    R2PriorKind.GAUSSIAN: {"beta": "analytic", "sigma2": "robust"},
    R2PriorKind.DIRICHLET_LAPLACE: {"beta": "analytic", "sigma2": "robust", "phi": "analytic", "tau": "analytic"},
    R2PriorKind.HORSESHOE: {"beta": "robust", "sigma2": "robust", "c2": "robust", "omega": "robust", "delta": "robust"},
}


def generate_design_matrix(n: int, p: int, rng: RngLike) -> np.ndarray:
    """Standard Gaussian entries with each column centered."""
    if n < 1 or p < 1:
        raise ValueError(f"design matrix needs n, p >= 1, got n={n}, p={p}")
    x = as_generator(rng).standard_normal(size=(n, p))
    return x - x.mean(axis=0)


def r2_bounds(kind, n: int, p: int) -> Bounds:
    kind = R2PriorKind(kind)
    noise = [("a1", 2.0, 500.0), ("b1", 0.2, 500.0)]
    if kind is R2PriorKind.GAUSSIAN:
        return Bounds.from_pairs([("gamma", 1.0, 500.0)] + noise)
    if kind is R2PriorKind.DIRICHLET_LAPLACE:
        return Bounds.from_pairs([("alpha", 1.0 / (3.0 * max(n, p)), 0.5)] + noise)
    if p < 2:
        raise ValueError("the horseshoe needs p >= 2 so that p0 can range over [1, p/2]")
    return Bounds.from_pairs([("p0", 1.0, p / 2.0), ("nu", 1.0, 80.0), ("s2", 1e-5, 100.0)] + noise)


def r2_secondary_config(kind, n_draws: int = 10_000, n_pairs: int = 10**6) -> SecondaryConfig:
    return SecondaryConfig.from_sources(SD_SOURCES[R2PriorKind(kind)], n_draws, n_pairs)


def _inverse_gamma(shape, scale, size, gen: np.random.Generator) -> np.ndarray:
    return scale / gen.gamma(shape, 1.0, size=size)


@dataclass(frozen=True)
class R2Prior:
    """
    Coefficient prior of one kind for a fixed design matrix.

    Attributes:
        kind (R2PriorKind): Which coefficient prior.
        design (np.ndarray): n x p centered design matrix.
    """

    kind: R2PriorKind
    design: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", R2PriorKind(self.kind))
        object.__setattr__(self, "design", np.atleast_2d(np.asarray(self.design, dtype=float)))

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def p(self) -> int:
        return self.design.shape[1]

    @property
    def names(self) -> Tuple[str, ...]:
        return HYPERPARAMETER_NAMES[self.kind]

    def unpack(self, lam) -> Dict[str, float]:
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (len(self.names),):
            raise ValueError(f"{self.kind.value} expects {len(self.names)} hyperparameters, got shape {lam.shape}")
        return dict(zip(self.names, (float(v) for v in lam)))

    def draw(self, lam, n: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        h = self.unpack(lam)
        gen = as_generator(rng)
        p = self.p
        sigma2 = _inverse_gamma(h["a1"], h["b1"], n, gen)
        if self.kind is R2PriorKind.GAUSSIAN:
            beta = gen.standard_normal(size=(n, p)) * np.sqrt(sigma2 / h["gamma"])[:, None]
            return {"beta": beta, "sigma2": sigma2}
        if self.kind is R2PriorKind.DIRICHLET_LAPLACE:
            phi = families.sample(families.dirichlet([h["alpha"]] * p), n, gen)
            tau = gen.gamma(p * h["alpha"], 2.0, size=n)
            beta = gen.laplace(0.0, np.sqrt(sigma2)[:, None] * phi * tau[:, None])
            return {"beta": beta, "sigma2": sigma2, "phi": phi, "tau": tau}
        c2 = _inverse_gamma(h["nu"] / 2.0, h["nu"] * h["s2"] / 2.0, n, gen)
        omega = np.abs(gen.standard_cauchy(size=n)) * h["p0"] / (p - h["p0"]) * np.sqrt(sigma2 / self.n)
        delta = np.abs(gen.standard_cauchy(size=(n, p)))
        with np.errstate(over="ignore", divide="ignore"):
            # c^2 d^2 / (c^2 + omega^2 d^2), written to survive infinite d or c^2
            shrunk = 1.0 / (1.0 / delta ** 2 + omega[:, None] ** 2 / c2[:, None])
            beta = gen.standard_normal(size=(n, p)) * omega[:, None] * np.sqrt(shrunk)
        return {"beta": beta, "sigma2": sigma2, "c2": c2, "omega": omega, "delta": delta}

    def analytic_sd(self, lam) -> Dict[str, np.ndarray]:
        h = self.unpack(lam)
        p = self.p
        mean_sigma2 = h["b1"] / (h["a1"] - 1.0)
        if self.kind is R2PriorKind.GAUSSIAN:
            return {"beta": np.full(p, np.sqrt(mean_sigma2 / h["gamma"]))}
        if self.kind is R2PriorKind.DIRICHLET_LAPLACE:
            shape = p * h["alpha"]
            phi_sd = families.standard_deviation(families.beta(h["alpha"], (p - 1) * h["alpha"]))
            mean_phi2 = phi_sd ** 2 + 1.0 / p ** 2
            mean_tau2 = 4.0 * shape * (shape + 1.0)
            return {
                "beta": np.full(p, np.sqrt(2.0 * mean_sigma2 * mean_phi2 * mean_tau2)),
                "phi": np.full(p, phi_sd),
                "tau": 2.0 * np.sqrt(shape),
            }
        return {}


def r2_from_draws(beta: np.ndarray, sigma2: np.ndarray, design: np.ndarray) -> np.ndarray:
    """
    R^2 per draw, clipped below one.

    Raises:
        SamplerError: When n^-1 beta' X' X beta overflows.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        fitted = np.atleast_2d(beta) @ design.T
        signal = np.mean(fitted ** 2, axis=1)
    if not np.all(np.isfinite(signal)):
        bad = int(np.flatnonzero(~np.isfinite(signal))[0])
        raise SamplerError(f"beta' X' X beta overflowed (sigma^2={sigma2[bad]:g}, max |beta|={np.max(np.abs(beta[bad])):g})")
    with np.errstate(divide="ignore"):
        r2 = expit(np.log(signal) - np.log(sigma2))
    return np.minimum(r2, R2_UPPER)


class R2PredictiveSampler:
    """Draws R^2 under the prior; R^2 is covariate-independent so the row is ignored."""

    def __init__(self, prior: R2Prior):
        self.prior = prior

    def __call__(self, lam, row: CovariateRow, n: int, rng: np.random.Generator) -> np.ndarray:
        draws = self.prior.draw(lam, n, rng)
        return r2_from_draws(draws["beta"], draws["sigma2"], self.prior.design)


def r2_beta_target(s1: float, s2: float) -> TargetSpec:
    return TargetSpec(families.beta(s1, s2), Support.bounded(1.0), label=f"Beta({s1:.3g}, {s2:.3g})")


def r2_target_grid() -> List[TargetSpec]:
    """Beta(s1, s2) for (s1, s2) in S x S, S four log-spaced values from 1/3 to 3."""
    return [r2_beta_target(s1, s2) for s1 in TARGET_SHAPES for s2 in TARGET_SHAPES]


def r2_roundtrip_target(prior: R2Prior, lam0, n_draws: int, rng: RngLike) -> TargetSpec:
    """A Beta fitted by moments to n_draws of the prior predictive R^2 at lam0."""
    gen = as_generator(rng)
    r2 = R2PredictiveSampler(prior)(np.asarray(lam0, dtype=float), CovariateRow(), n_draws, gen)
    mean, var = float(np.mean(r2)), float(np.var(r2, ddof=1))
    if not 0 < var < mean * (1.0 - mean):
        raise ValueError(f"prior predictive R^2 at {lam0} has moments ({mean:g}, {var:g}) no Beta can match")
    common = mean * (1.0 - mean) / var - 1.0
    a, b = mean * common, (1.0 - mean) * common
    logger.info("roundtrip target at lambda0=%s: Beta(%.4f, %.4f)", list(lam0), a, b)
    return TargetSpec(families.beta(a, b), Support.bounded(1.0), label=f"roundtrip Beta({a:.3g}, {b:.3g})")


def r2_target_from_options(options: Mapping[str, object]) -> Tuple[float, float]:
    """(s1, s2) from either explicit shapes or grid indices."""
    if "s1" in options and "s2" in options:
        return float(options["s1"]), float(options["s2"])
    i, j = int(options.get("grid_row", 3)), int(options.get("grid_col", 3))
    return TARGET_SHAPES[i], TARGET_SHAPES[j]
