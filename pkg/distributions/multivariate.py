"""
Correlation matrices and the multivariate skew-normal.

Correlation Cholesky factors are built from canonical partial correlations
(the construction used by the Stan math library), and skew-normal draws use
the conditioning representation: draw (Z0, Z) jointly Gaussian and reflect Z
on the sign of Z0.
"""
import logging

import numpy as np

from distributions.rng import RngLike, as_generator

logger = logging.getLogger(__name__)


def dimension_from_partials(n_partials: int) -> int:
    """Matrix dimension B with B(B-1)/2 == n_partials."""
    dim = int(round((1 + np.sqrt(1 + 8 * n_partials)) / 2))
    if dim * (dim - 1) // 2 != n_partials:
        raise ValueError(f"{n_partials} partial correlations do not fill a correlation matrix")
    return dim


def lkj_partial_to_cholesky(omega) -> np.ndarray:
    """
    Map canonical partial correlations to the Cholesky factor of a correlation matrix.

    Args:
        omega: vector of B(B-1)/2 values in [-1, 1], ordered column by column.

    Returns:
        np.ndarray: lower-triangular L with L @ L.T a correlation matrix.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(np.abs(omega) > 1) or not np.all(np.isfinite(omega)):
        raise ValueError(f"partial correlations must lie in [-1, 1], got {omega}")
    dim = dimension_from_partials(omega.size)
    chol = np.zeros((dim, dim))
    chol[0, 0] = 1.0
    if dim == 1:
        return chol
    pull = dim - 1
    chol[1:, 0] = omega[:pull]
    remaining = np.zeros(dim)
    remaining[1:] = 1.0 - omega[:pull] ** 2
    position = 0
    for i in range(1, dim - 1):
        position += pull
        pull = dim - 1 - i
        partial = omega[position:position + pull]
        chol[i, i] = np.sqrt(remaining[i])
        chol[i + 1:, i] = partial * np.sqrt(remaining[i + 1:])
        remaining[i + 1:] *= 1.0 - partial ** 2
    chol[dim - 1, dim - 1] = np.sqrt(remaining[dim - 1])
    return chol


def sample_lkj_cholesky(dim: int, eta: float, rng: RngLike) -> np.ndarray:
    """Draw the Cholesky factor of an LKJ(eta) correlation matrix."""
    if dim < 1 or eta <= 0:
        raise ValueError("LKJ needs dim >= 1 and eta > 0")
    gen = as_generator(rng)
    partials = []
    alpha = eta + 0.5 * (dim - 1)
    for i in range(dim - 1):
        alpha -= 0.5
        partials.extend(2.0 * gen.beta(alpha, alpha, size=dim - 1 - i) - 1.0)
    return lkj_partial_to_cholesky(np.array(partials))


def skew_normal_delta(scale: np.ndarray, slant: np.ndarray) -> np.ndarray:
    """
    The delta vector of the skew-normal with scale matrix S and slant eta:
    delta = Omega_bar eta / sqrt(1 + eta' Omega_bar eta), Omega_bar the correlation of S.
    """
    scale = np.asarray(scale, dtype=float)
    slant = np.asarray(slant, dtype=float)
    sd = np.sqrt(np.diag(scale))
    corr = scale / np.outer(sd, sd)
    corr_slant = corr @ slant
    return corr_slant / np.sqrt(1.0 + slant @ corr_slant)


def skew_normal_marginal_sd(scale, slant) -> np.ndarray:
    """Marginal standard deviations sqrt(S_ii (1 - 2 delta_i^2 / pi))."""
    scale = np.asarray(scale, dtype=float)
    delta = skew_normal_delta(scale, slant)
    return np.sqrt(np.diag(scale) * (1.0 - 2.0 * delta ** 2 / np.pi))


def sample_mv_skew_normal(scale, slant, n: int, rng: RngLike) -> np.ndarray:
    """
    Draw n rows from the zero-location multivariate skew-normal.

    Args:
        scale: symmetric positive definite B x B scale matrix S.
        slant: B-vector eta; zero recovers MultiNormal(0, S).
        n (int): number of draws.
        rng: RngState or numpy Generator.

    Returns:
        np.ndarray: n x B draws.

    Raises:
        np.linalg.LinAlgError: when S (or the joint selection covariance) is not positive definite.
    """
    scale = np.asarray(scale, dtype=float)
    slant = np.atleast_1d(np.asarray(slant, dtype=float))
    dim = scale.shape[0]
    if scale.shape != (dim, dim) or slant.shape != (dim,):
        raise ValueError(f"scale must be {dim}x{dim} and slant length {dim}")
    if not np.allclose(scale, scale.T):
        raise np.linalg.LinAlgError("scale matrix must be symmetric")
    np.linalg.cholesky(scale)
    gen = as_generator(rng)
    sd = np.sqrt(np.diag(scale))
    corr = scale / np.outer(sd, sd)
    delta = skew_normal_delta(scale, slant)
    joint = np.empty((dim + 1, dim + 1))
    joint[0, 0] = 1.0
    joint[0, 1:] = delta
    joint[1:, 0] = delta
    joint[1:, 1:] = corr
    # the joint is only semidefinite when |delta| hits the boundary, so factor with a tiny jitter
    chol = np.linalg.cholesky(joint + 1e-12 * np.eye(dim + 1))
    draws = gen.standard_normal(size=(n, dim + 1)) @ chol.T
    z = np.where(draws[:, :1] > 0, draws[:, 1:], -draws[:, 1:])
    return z * sd
