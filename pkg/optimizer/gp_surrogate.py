"""
Gaussian process surrogates for the two objectives.

Inputs are mapped to the unit cube through Bounds and outputs standardized
before fitting a scikit-learn GaussianProcessRegressor with kernel

    signal^2 * Matern_5/2(ARD lengthscales) + White(nugget)

Kernel hyperparameters maximize the log marginal likelihood; the optimizer
runs L-BFGS-B from GP_RESTARTS Latin hypercube starts in log-hyperparameter
space, drawn from the caller's stream so fits are reproducible.
"""
from dataclasses import dataclass
from typing import Tuple
import logging
import warnings

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc
from sklearn.exceptions import ConvergenceWarning
from sklearn.gaussian_process import GaussianProcessRegressor
from sklearn.gaussian_process.kernels import ConstantKernel, Matern, WhiteKernel

from constants.pbbo_constants import GP_LENGTHSCALE_BOUNDS, GP_NUGGET_FLOOR, GP_RESTARTS
from distributions.rng import RngLike, as_generator
from optimizer.bounds import Bounds

logger = logging.getLogger(__name__)

SIGNAL_VARIANCE_BOUNDS = (GP_NUGGET_FLOOR, 1e3)
NUGGET_UPPER = 1.0


class GpFitError(RuntimeError):
    """A surrogate could not be fitted."""


@dataclass
class GpSurrogate:
    """
    Attributes:
        bounds (Bounds): Box used to scale inputs.
        regressor (GaussianProcessRegressor): The fitted model on standardized outputs.
        y_mean (float), y_scale (float): Output standardization.
        nugget (float): Lower bound placed on the white-noise variance.
        log_marginal_likelihood (float): At the fitted hyperparameters.
    """

    bounds: Bounds
    regressor: GaussianProcessRegressor
    y_mean: float
    y_scale: float
    nugget: float
    log_marginal_likelihood: float

    @property
    def lengthscales(self) -> np.ndarray:
        return np.atleast_1d(self.regressor.kernel_.k1.k2.length_scale)

    @property
    def signal_variance(self) -> float:
        return float(self.regressor.kernel_.k1.k1.constant_value)

    @property
    def noise_variance(self) -> float:
        return float(self.regressor.kernel_.k2.noise_level)


def _multistart_optimizer(gen: np.random.Generator, restarts: int):
    def optimizer(obj_func, initial_theta, bounds):
        starts = qmc.scale(qmc.LatinHypercube(d=bounds.shape[0], seed=gen).random(restarts), bounds[:, 0], bounds[:, 1])
        best_theta, best_value = initial_theta, np.inf
        for start in starts:
            result = minimize(obj_func, start, method="L-BFGS-B", jac=True, bounds=bounds)
            if np.isfinite(result.fun) and result.fun < best_value:
                best_theta, best_value = result.x, float(result.fun)
        if not np.isfinite(best_value):
            raise GpFitError("no restart reached a finite marginal likelihood")
        return best_theta, best_value

    return optimizer


def make_kernel(dim: int, nugget: float):
    return (
        ConstantKernel(1.0, SIGNAL_VARIANCE_BOUNDS)
        * Matern(length_scale=np.ones(dim), length_scale_bounds=GP_LENGTHSCALE_BOUNDS, nu=2.5)
        + WhiteKernel(noise_level=nugget, noise_level_bounds=(nugget, max(NUGGET_UPPER, 10 * nugget)))
    )


def fit_gp(lam, y, bounds: Bounds, rng: RngLike, nugget: float = GP_NUGGET_FLOOR,
           restarts: int = GP_RESTARTS) -> GpSurrogate:
    """
    Fit a surrogate to (lam, y).

    Raises:
        ValueError: With fewer than 2L + 1 rows.
        GpFitError: On non-finite outputs or a failed likelihood optimization.
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if lam.shape[0] < 2 * bounds.dim + 1:
        raise ValueError(f"a surrogate in {bounds.dim} dimensions needs >= {2 * bounds.dim + 1} rows, got {lam.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise GpFitError(f"{int(np.sum(~np.isfinite(y)))} non-finite surrogate outputs")
    nugget = max(nugget, GP_NUGGET_FLOOR)
    gen = as_generator(rng)
    y_mean = float(np.mean(y))
    y_scale = float(np.std(y))
    if y_scale <= 0:
        y_scale = 1.0
    regressor = GaussianProcessRegressor(
        kernel=make_kernel(bounds.dim, nugget),
        optimizer=_multistart_optimizer(gen, restarts),
        n_restarts_optimizer=0,
        normalize_y=False,
        random_state=int(gen.integers(2**31 - 1)),
    )
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            regressor.fit(bounds.to_unit(lam), (y - y_mean) / y_scale)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise GpFitError(f"surrogate fit failed with nugget {nugget:g}: {exc}") from exc
    lml = float(regressor.log_marginal_likelihood_value_)
    if not np.isfinite(lml):
        raise GpFitError(f"surrogate log marginal likelihood is {lml}")
    return GpSurrogate(bounds, regressor, y_mean, y_scale, nugget, lml)


def gp_predict(g: GpSurrogate, points) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at points, in the original output units."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mean, sd = g.regressor.predict(g.bounds.to_unit(points), return_std=True)
    return mean * g.y_scale + g.y_mean, np.maximum((sd * g.y_scale) ** 2, 0.0)
