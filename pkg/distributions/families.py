"""
Parametric families and finite mixtures.

This module houses every elementary family used by targets, importance
proposals and the example models, together with finite mixtures that may
carry point masses (atoms). Evaluation is delegated to scipy.stats frozen
distributions; this module adds right truncation, atoms with right-closed
CDF jumps, and log-space mixing.

The module includes:
- DistSpec: a family tag plus its natural parameter vector, optionally right-truncated
- MixtureSpec: weighted DistSpec components plus weighted atoms
- FunctionalDist: a user-supplied CDF/density/sampler triple
- sample, log_cdf, log_density, log_mass, standard_deviation: family-agnostic operations

Parameterizations:
    normal(mu, sigma), lognormal(mu, sigma) on the log scale, gamma(shape, rate),
    beta(a, b[, width]) on (0, width), student_t(df, loc, scale),
    exponential_shifted(shift, rate), inverse_gamma(shape, scale), laplace(loc, scale),
    half_cauchy(scale), weibull_ph(shape, log_rate) with survival exp(-y**shape * exp(log_rate)),
    dirichlet(alpha_1, ..., alpha_K).
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from scipy import stats

from distributions.rng import RngLike, as_generator
from utils.log_utils import log_sum_exp

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-12

# family -> (allowed parameter counts, indices that must be strictly positive)
_FAMILIES = {
    "normal": ((2,), (1,)),
    "lognormal": ((2,), (1,)),
    "gamma": ((2,), (0, 1)),
    "beta": ((2, 3), (0, 1, 2)),
    "student_t": ((3,), (0, 2)),
    "exponential_shifted": ((2,), (1,)),
    "inverse_gamma": ((2,), (0, 1)),
    "laplace": ((2,), (1,)),
    "half_cauchy": ((1,), (0,)),
    "weibull_ph": ((2,), (0,)),
    "dirichlet": (None, None),
}


@dataclass(frozen=True)
class DistSpec:
    """
    A parametric family in its natural parameterization.

    Attributes:
        family (str): One of the family tags listed in the module docstring.
        params (tuple[float, ...]): Parameter vector.
        upper (Optional[float]): Right-truncation point for continuous univariate families.
    """

    family: str
    params: Tuple[float, ...]
    upper: Optional[float] = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family '{self.family}', expected one of {sorted(_FAMILIES)}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if not all(np.isfinite(params)):
            raise ValueError(f"{self.family}: parameters must be finite, got {params}")
        counts, positive = _FAMILIES[self.family]
        if self.family == "dirichlet":
            if len(params) < 2 or min(params) <= 0:
                raise ValueError("dirichlet: need at least two concentrations, all > 0")
            if self.upper is not None:
                raise ValueError("dirichlet cannot be truncated")
            return
        if len(params) not in counts:
            raise ValueError(f"{self.family}: expected {counts} parameters, got {len(params)}")
        for i in positive:
            if i < len(params) and params[i] <= 0:
                raise ValueError(f"{self.family}: parameter {i} must be > 0, got {params[i]}")
        if self.upper is not None:
            upper = float(self.upper)
            object.__setattr__(self, "upper", upper)
            if not np.isfinite(self.frozen.logcdf(upper)):
                raise ValueError(f"{self.family}: truncation point {upper} leaves no mass")

    @property
    def is_multivariate(self) -> bool:
        return self.family == "dirichlet"

    @cached_property
    def frozen(self):
        p = self.params
        if self.family == "normal":
            return stats.norm(loc=p[0], scale=p[1])
        if self.family == "lognormal":
            return stats.lognorm(s=p[1], scale=np.exp(p[0]))
        if self.family == "gamma":
            return stats.gamma(a=p[0], scale=1.0 / p[1])
        if self.family == "beta":
            width = p[2] if len(p) == 3 else 1.0
            return stats.beta(p[0], p[1], scale=width)
        if self.family == "student_t":
            return stats.t(df=p[0], loc=p[1], scale=p[2])
        if self.family == "exponential_shifted":
            return stats.expon(loc=p[0], scale=1.0 / p[1])
        if self.family == "inverse_gamma":
            return stats.invgamma(p[0], scale=p[1])
        if self.family == "laplace":
            return stats.laplace(loc=p[0], scale=p[1])
        if self.family == "half_cauchy":
            return stats.halfcauchy(scale=p[0])
        if self.family == "weibull_ph":
            return stats.weibull_min(c=p[0], scale=np.exp(-p[1] / p[0]))
        raise ValueError(f"{self.family} has no univariate scipy counterpart")


@dataclass(frozen=True)
class MixtureSpec:
    """
    Weighted components plus weighted atoms; all weights sum to one.

    Attributes:
        components (tuple[tuple[float, DistSpec], ...]): (weight, univariate DistSpec) pairs.
        atoms (tuple[tuple[float, float], ...]): (weight, location) point masses.
    """

    components: Tuple[Tuple[float, DistSpec], ...] = ()
    atoms: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        components = tuple((float(w), d) for w, d in self.components)
        atoms = tuple((float(w), float(loc)) for w, loc in self.atoms)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "atoms", atoms)
        weights = [w for w, _ in components] + [w for w, _ in atoms]
        if not weights:
            raise ValueError("a mixture needs at least one component or atom")
        if min(weights) < 0:
            raise ValueError(f"mixture weights must be >= 0, got {weights}")
        if abs(sum(weights) - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"mixture weights must sum to 1, got {sum(weights)!r}")
        if any(d.is_multivariate for _, d in components):
            raise ValueError("mixture components must be univariate")
        locations = [loc for _, loc in atoms]
        if len(set(locations)) != len(locations):
            raise ValueError(f"atom locations must be distinct, got {locations}")

    @classmethod
    def normalized(cls, components=(), atoms=()) -> "MixtureSpec":
        """Build a mixture after rescaling the given weights to sum to one."""
        total = sum(w for w, _ in components) + sum(w for w, _ in atoms)
        if total <= 0:
            raise ValueError("mixture weights must have a positive sum")
        return cls(
            components=tuple((w / total, d) for w, d in components),
            atoms=tuple((w / total, loc) for w, loc in atoms),
        )

    @classmethod
    def single(cls, dist: DistSpec) -> "MixtureSpec":
        return cls(components=((1.0, dist),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components] + [w for w, _ in self.atoms])


@dataclass(frozen=True)
class FunctionalDist:
    """
    A distribution given by callables instead of a family tag.

    log_cdf_fn and log_density_fn take and return arrays; sampler_fn takes
    (n, np.random.Generator). log_mass_fn is optional and defaults to no atoms.
    """

    log_cdf_fn: Callable[[np.ndarray], np.ndarray]
    log_density_fn: Callable[[np.ndarray], np.ndarray]
    sampler_fn: Callable[[int, np.random.Generator], np.ndarray]
    log_mass_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None)


Distribution = Union[DistSpec, MixtureSpec, FunctionalDist]


def from_cdf(cdf, density, sampler, mass=None) -> FunctionalDist:
    """
    Wrap a plain-probability CDF/density pair with a guarded log.

    Values are clipped into [0, 1] (CDF) or [0, inf) (density) before the log so
    rounding slightly outside the range never yields nan.
    """

    def _guarded_log(fn, upper):
        def wrapped(y):
            with np.errstate(divide="ignore"):
                return np.log(np.clip(np.asarray(fn(y), dtype=float), 0.0, upper))
        return wrapped

    log_mass = _guarded_log(mass, 1.0) if mass is not None else None
    return FunctionalDist(_guarded_log(cdf, 1.0), _guarded_log(density, np.inf), sampler, log_mass)


def sample(spec: Distribution, n: int, rng: RngLike) -> np.ndarray:
    """
    Draw n i.i.d. values. Dirichlet returns an (n, K) array, everything else (n,).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gen = as_generator(rng)
    if isinstance(spec, FunctionalDist):
        return np.asarray(spec.sampler_fn(n, gen), dtype=float)
    if isinstance(spec, MixtureSpec):
        return _sample_mixture(spec, n, gen)
    if spec.family == "dirichlet":
        return _sample_dirichlet(np.asarray(spec.params), n, gen)
    if spec.upper is None:
        return np.asarray(spec.frozen.rvs(size=n, random_state=gen), dtype=float)
    u = gen.uniform(size=n) * spec.frozen.cdf(spec.upper)
    return np.minimum(spec.frozen.ppf(u), spec.upper)


def _sample_mixture(spec: MixtureSpec, n: int, gen: np.random.Generator) -> np.ndarray:
    weights = spec.weights
    labels = gen.choice(weights.size, size=n, p=weights / weights.sum())
    out = np.empty(n)
    for k, (_, dist) in enumerate(spec.components):
        idx = labels == k
        if idx.any():
            out[idx] = sample(dist, int(idx.sum()), gen)
    offset = len(spec.components)
    for k, (_, location) in enumerate(spec.atoms):
        out[labels == offset + k] = location
    return out


def _sample_dirichlet(alpha: np.ndarray, n: int, gen: np.random.Generator) -> np.ndarray:
    # Gamma(a) = Gamma(a + 1) * U**(1/a); normalizing in log space survives tiny a
    log_g = np.log(gen.gamma(alpha + 1.0, size=(n, alpha.size))) + np.log(gen.uniform(size=(n, alpha.size))) / alpha
    log_norm = log_sum_exp(log_g, axis=1)
    return np.exp(log_g - log_norm[:, None])


def log_cdf(spec: Distribution, y) -> np.ndarray:
    """
    Log CDF; atoms are right-closed jumps, so the CDF includes an atom at its location.
    """
    y = np.asarray(y, dtype=float)
    if isinstance(spec, FunctionalDist):
        return np.asarray(spec.log_cdf_fn(y), dtype=float)
    if isinstance(spec, MixtureSpec):
        terms = [np.log(w) + log_cdf(d, y) if w > 0 else np.full(y.shape, -np.inf) for w, d in spec.components]
        terms += [np.where(y >= loc, np.log(w) if w > 0 else -np.inf, -np.inf) for w, loc in spec.atoms]
        return log_sum_exp(np.stack(terms), axis=0)
    _require_univariate(spec)
    if spec.upper is None:
        return spec.frozen.logcdf(y)
    return np.minimum(spec.frozen.logcdf(np.minimum(y, spec.upper)) - spec.frozen.logcdf(spec.upper), 0.0)


def log_density(spec: Distribution, y) -> np.ndarray:
    """
    Log density of the continuous part; at an atom location the log atom weight.
    """
    y = np.asarray(y, dtype=float)
    if isinstance(spec, FunctionalDist):
        out = np.asarray(spec.log_density_fn(y), dtype=float)
        if spec.log_mass_fn is not None:
            mass = np.asarray(spec.log_mass_fn(y), dtype=float)
            out = np.where(np.isfinite(mass), mass, out)
        return out
    if isinstance(spec, MixtureSpec):
        if spec.components:
            terms = [np.log(w) + log_density(d, y) if w > 0 else np.full(y.shape, -np.inf) for w, d in spec.components]
            out = log_sum_exp(np.stack(terms), axis=0)
        else:
            out = np.full(y.shape, -np.inf)
        for w, loc in spec.atoms:
            out = np.where(y == loc, np.log(w) if w > 0 else -np.inf, out)
        return out
    _require_univariate(spec)
    with np.errstate(divide="ignore"):
        if spec.upper is None:
            return spec.frozen.logpdf(y)
        dens = spec.frozen.logpdf(y) - spec.frozen.logcdf(spec.upper)
    return np.where(y > spec.upper, -np.inf, dens)


def log_continuous_density(spec: Distribution, y) -> np.ndarray:
    """Log density of the continuous part only, atoms ignored."""
    y = np.asarray(y, dtype=float)
    if isinstance(spec, MixtureSpec):
        if not spec.components:
            return np.full(y.shape, -np.inf)
        terms = [np.log(w) + log_density(d, y) if w > 0 else np.full(y.shape, -np.inf) for w, d in spec.components]
        return log_sum_exp(np.stack(terms), axis=0)
    if isinstance(spec, FunctionalDist):
        return np.asarray(spec.log_density_fn(y), dtype=float)
    return log_density(spec, y)


def log_mass(spec: Distribution, y) -> np.ndarray:
    """Log probability of a point mass at y; -inf where there is none."""
    y = np.asarray(y, dtype=float)
    out = np.full(y.shape, -np.inf)
    if isinstance(spec, MixtureSpec):
        for w, loc in spec.atoms:
            if w > 0:
                out = np.where(y == loc, np.log(w), out)
    elif isinstance(spec, FunctionalDist) and spec.log_mass_fn is not None:
        out = np.asarray(spec.log_mass_fn(y), dtype=float)
    return out


def atom_locations(spec: Distribution) -> Tuple[float, ...]:
    if isinstance(spec, MixtureSpec):
        return tuple(loc for w, loc in spec.atoms if w > 0)
    return ()


def standard_deviation(spec: DistSpec) -> float:
    """Closed-form standard deviation of an untruncated univariate family (inf when undefined)."""
    _require_univariate(spec)
    if spec.upper is not None:
        raise ValueError("closed-form SD is not provided for truncated families")
    with np.errstate(invalid="ignore"):
        sd = float(spec.frozen.std())
    return sd if np.isfinite(sd) else np.inf


def _require_univariate(spec: DistSpec):
    if spec.is_multivariate:
        raise ValueError(f"{spec.family} is multivariate; only sampling is supported")


# Convenience constructors used throughout the models and tests
def normal(mu: float, sigma: float) -> DistSpec:
    return DistSpec("normal", (mu, sigma))


def lognormal(mu: float, sigma: float, upper: Optional[float] = None) -> DistSpec:
    return DistSpec("lognormal", (mu, sigma), upper)


def gamma(shape: float, rate: float) -> DistSpec:
    return DistSpec("gamma", (shape, rate))


def beta(a: float, b: float, width: float = 1.0) -> DistSpec:
    return DistSpec("beta", (a, b, width))


def student_t(df: float, loc: float, scale: float) -> DistSpec:
    return DistSpec("student_t", (df, loc, scale))


def dirichlet(alpha: Sequence[float]) -> DistSpec:
    return DistSpec("dirichlet", tuple(alpha))
