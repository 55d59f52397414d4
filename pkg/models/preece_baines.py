"""
Preece-Baines Growth Model

Height at age t is

    h(t; theta) = h1 - 2 (h1 - h0) / (exp{s0 (t - gamma)} + exp{s1 (t - gamma)})

with h1 = h0 + delta_h and s1 = s0 + delta_s, so 0 < h0 < h1 and 0 < s0 < s1
whenever the five parameters theta = (h0, delta_h, s0, delta_s, gamma) are
positive. Each parameter gets a lognormal prior set by its natural-scale mean
and standard deviation, and observations add Normal(0, sigma_y^2) noise with
sigma_y ~ LogNormal(0, 0.2^2) held fixed.

Hyperparameter order: mu_h0, sigma_h0, mu_delta_h, sigma_delta_h, mu_s0,
sigma_s0, mu_delta_s, sigma_delta_s, mu_gamma, sigma_gamma.
"""
from typing import Dict, Optional, Sequence, Tuple
import logging

import numpy as np

from distributions import families
from distributions.families import MixtureSpec
from distributions.rng import RngLike, as_generator
from optimizer.bounds import Bounds
from targets.target import CovariateRow, Support, TargetSet, TargetSpec

logger = logging.getLogger(__name__)

PARAMETERS = ("h0", "delta_h", "s0", "delta_s", "gamma")
NOISE_LOG_SCALE = 0.2
AGE_RANGE = (2.0, 18.0)
AGE_KEY = "age"
BOUND_EPSILON = 1e-6

# (mu lower, mu upper, sigma upper); every sigma lower bound is BOUND_EPSILON
_BOUNDS = {
    "h0": (130.0, 185.0, 30.0),
    "delta_h": (BOUND_EPSILON, 30.0, 2.0),
    "s0": (BOUND_EPSILON, 0.2, 0.1),
    "delta_s": (BOUND_EPSILON, 1.5, 0.2),
    "gamma": (9.0, 15.0, 1.0),
}

COVARIATE_SPECIFIC_TARGETS = ((2.0, 88.0, 3.5), (8.0, 130.0, 5.5), (13.0, 160.0, 8.0), (18.0, 172.0, 9.5))
# (weight, shape, rate); the weights sum to 1.01 and are rescaled
COVARIATE_INDEPENDENT_MIXTURE = ((0.38, 45.49, 0.44), (0.36, 115.41, 0.81), (0.27, 277.51, 1.64))


def hyperparameter_names() -> Tuple[str, ...]:
    return tuple(name for q in PARAMETERS for name in (f"mu_{q}", f"sigma_{q}"))


def pb_bounds() -> Bounds:
    pairs = []
    for q in PARAMETERS:
        mu_lo, mu_hi, sigma_hi = _BOUNDS[q]
        pairs += [(f"mu_{q}", mu_lo, mu_hi), (f"sigma_{q}", BOUND_EPSILON, sigma_hi)]
    return Bounds.from_pairs(pairs)


def lognormal_from_moments(mean, sd) -> Tuple[np.ndarray, np.ndarray]:
    """Log-scale (mu, sigma) of the lognormal with the given natural mean and SD."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    log_var = np.log1p((sd / mean) ** 2)
    return np.log(mean) - 0.5 * log_var, np.sqrt(log_var)


def pb_height(t, theta) -> np.ndarray:
    """
    Height at age t. theta is (h0, delta_h, s0, delta_s, gamma), each entry a scalar
    or an array broadcasting against t. Exactly h0 at t = gamma.
    """
    h0, delta_h, s0, delta_s, gamma = (np.asarray(v, dtype=float) for v in theta)
    t = np.asarray(t, dtype=float)
    shift = t - gamma
    with np.errstate(over="ignore"):
        denominator = np.exp(s0 * shift) + np.exp((s0 + delta_s) * shift)
    return h0 + delta_h * (1.0 - 2.0 / denominator)


class PreeceBainesPrior:
    """Independent lognormals on theta, each set by its natural mean and SD."""

    names = hyperparameter_names()

    def unpack(self, lam) -> Tuple[np.ndarray, np.ndarray]:
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (2 * len(PARAMETERS),):
            raise ValueError(f"expected {2 * len(PARAMETERS)} Preece-Baines hyperparameters, got shape {lam.shape}")
        return lam[0::2], lam[1::2]

    def draw(self, lam, n: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        mean, sd = self.unpack(lam)
        mu, sigma = lognormal_from_moments(mean, sd)
        gen = as_generator(rng)
        draws = np.exp(gen.normal(mu, sigma, size=(n, len(PARAMETERS))))
        return dict(zip(PARAMETERS, draws.T))

    def analytic_sd(self, lam) -> Dict[str, np.ndarray]:
        _, sd = self.unpack(lam)
        return dict(zip(PARAMETERS, sd))


def pb_secondary_sources() -> Dict[str, str]:
    return {q: "analytic" for q in PARAMETERS}


class PreeceBainesPredictiveSampler:
    """
    Noisy heights under the prior. Rows carrying an age are evaluated there; rows
    without one draw the age from Uniform(2, 18) per draw.
    """

    def __init__(self, prior: Optional[PreeceBainesPrior] = None):
        self.prior = prior or PreeceBainesPrior()

    def __call__(self, lam, row: CovariateRow, n: int, rng: np.random.Generator) -> np.ndarray:
        gen = as_generator(rng)
        draws = self.prior.draw(lam, n, gen)
        if AGE_KEY in row.conditioning:
            age = np.full(n, float(row[AGE_KEY]))
        else:
            age = gen.uniform(*AGE_RANGE, size=n)
        noise_sd = np.exp(gen.normal(0.0, NOISE_LOG_SCALE, size=n))
        height = pb_height(age, [draws[q] for q in PARAMETERS])
        return height + noise_sd * gen.standard_normal(size=n)


def covariate_specific_targets(ages: Optional[Sequence[float]] = None) -> TargetSet:
    """Normal targets at ages 2, 8, 13 and 18 (or the listed subset)."""
    chosen = [t for t in COVARIATE_SPECIFIC_TARGETS if ages is None or t[0] in ages]
    if not chosen:
        raise ValueError(f"no covariate-specific target at ages {ages}")
    rows = [CovariateRow(np.array([age]), {AGE_KEY: age}, key=k) for k, (age, _, _) in enumerate(chosen)]
    targets = [
        TargetSpec(families.normal(mean, sd), Support.real_line(), label=f"height at age {age:g}")
        for age, mean, sd in chosen
    ]
    return TargetSet.from_rows(rows, targets)


def covariate_independent_target() -> TargetSet:
    components = [(w, families.gamma(shape, rate)) for w, shape, rate in COVARIATE_INDEPENDENT_MIXTURE]
    target = TargetSpec(MixtureSpec.normalized(components), Support.positive_half_line(), label="height, ages 2 to 18")
    return TargetSet.single(target)


def monotonicity_violation_rate(lam, n: int, rng: RngLike, ages: Optional[np.ndarray] = None) -> float:
    """
    Fraction of prior draws whose growth curve decreases somewhere on the age grid
    or leaves (0, inf). Logged as a warning when nonzero.
    """
    ages = np.linspace(*AGE_RANGE, 33) if ages is None else np.asarray(ages, dtype=float)
    draws = PreeceBainesPrior().draw(lam, n, as_generator(rng))
    theta = [draws[q][:, None] for q in PARAMETERS]
    curves = pb_height(ages[None, :], theta)
    bad = np.any(np.diff(curves, axis=1) < 0, axis=1) | np.any(curves <= 0, axis=1)
    rate = float(np.mean(bad))
    if rate > 0:
        logger.warning("%.2f%% of growth curves are implausible at lambda=%s", 100 * rate, np.asarray(lam).tolist())
    return rate
