"""
Log-space utilities

Numerically stable helpers shared by the discrepancy estimator, the mixture
distributions and the design weighting.

Functions:
    log_sum_exp(values, axis=None) -> float | np.ndarray:
        Max-shifted log of a sum of exponentials; -inf entries are ignored.
    log_mean_exp(values, axis=None) -> float | np.ndarray:
        log_sum_exp minus the log of the count.
    log1mexp(x) -> np.ndarray:
        log(1 - exp(-x)) for x >= 0, split at log(2).
    log_abs_diff_exp(a, b) -> np.ndarray:
        log|exp(a) - exp(b)| evaluated without leaving log space.
    log_softmax(values) -> np.ndarray:
        values - log_sum_exp(values).
"""
import numpy as np

LOG_TWO = np.log(2.0)


def log_sum_exp(values, axis=None):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("log_sum_exp needs at least one value")
    v_max = np.max(values, axis=axis, keepdims=True)
    # all -inf slices shift by zero so they stay -inf instead of turning nan
    v_max = np.where(np.isneginf(v_max), 0.0, v_max)
    with np.errstate(divide="ignore"):
        total = np.log(np.sum(np.exp(values - v_max), axis=axis, keepdims=True)) + v_max
    if axis is None:
        return float(total.reshape(()))
    return np.squeeze(total, axis=axis)


def log_mean_exp(values, axis=None):
    values = np.asarray(values, dtype=float)
    count = values.size if axis is None else values.shape[axis]
    return log_sum_exp(values, axis=axis) - np.log(count)


def log1mexp(x):
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = (x >= 0) & (x <= LOG_TWO)
        large = x > LOG_TWO
        out[small] = np.log(-np.expm1(-x[small]))
        out[large] = np.log1p(-np.exp(-x[large]))
    return out


def log_abs_diff_exp(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    out = np.full(hi.shape, -np.inf)
    finite_hi = ~np.isneginf(hi)
    gap = hi[finite_hi] - lo[finite_hi]
    out[finite_hi] = hi[finite_hi] + log1mexp(gap)
    return out


def log_softmax(values):
    values = np.asarray(values, dtype=float)
    return values - log_sum_exp(values)
