"""Sigmoid-linear hypothesis class mapping a 3-covariate to a 3x4 weight matrix.

A parameter vector theta packs a 12x3 weight block W (row-major, 36 entries)
followed by 12 biases.  The prediction is ``2 * sigmoid(W x + b)`` reshaped
row-major into 3 rows of 4, so every predicted entry lies in (0, 2).
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError

N_OUTPUTS = 12
N_FEATURES = 3
N_PARAMS = N_OUTPUTS * N_FEATURES + N_OUTPUTS  # 48


def _check_theta(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (N_PARAMS,):
        raise ValueError(f"theta must have {N_PARAMS} entries")
    if not np.isfinite(theta).all():
        raise NumericError("theta must be finite")
    return theta


def _check_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (N_FEATURES,):
        raise ValueError("covariate must have 3 components")
    if not np.isfinite(x).all():
        raise NumericError("covariate must be finite")
    return x


def sigmoid(s):
    """Numerically stable logistic function; no overflow for large |s|."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def predict(theta, x) -> np.ndarray:
    """Predicted 3x4 weight matrix ``2*S(W x + b)``, entries in (0, 2)."""
    theta = _check_theta(theta)
    x = _check_x(x)
    W = theta[: N_OUTPUTS * N_FEATURES].reshape(N_OUTPUTS, N_FEATURES)
    s = W @ x + theta[N_OUTPUTS * N_FEATURES:]
    return (2.0 * sigmoid(s)).reshape(3, 4)


def predict_batch(thetas, x) -> np.ndarray:
    """Vectorized predict over a stack of parameter vectors; returns (n, 3, 4)."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 2 or thetas.shape[1] != N_PARAMS:
        raise ValueError(f"thetas must have shape (n, {N_PARAMS})")
    x = _check_x(x)
    W = thetas[:, : N_OUTPUTS * N_FEATURES].reshape(-1, N_OUTPUTS, N_FEATURES)
    s = W @ x + thetas[:, N_OUTPUTS * N_FEATURES:]
    return (2.0 * sigmoid(s)).reshape(-1, 3, 4)


def jacobian(theta, x) -> np.ndarray:
    """12x48 Jacobian of the vectorized prediction w.r.t. theta.

    Output k depends only on row k of W and bias k:
    d/dW[k, j] = 2 S'(s_k) x_j and d/db[k] = 2 S'(s_k), zero elsewhere.
    """
    theta = _check_theta(theta)
    x = _check_x(x)
    W = theta[: N_OUTPUTS * N_FEATURES].reshape(N_OUTPUTS, N_FEATURES)
    s = W @ x + theta[N_OUTPUTS * N_FEATURES:]
    sig = sigmoid(s)
    g = 2.0 * sig * (1.0 - sig)  # (12,)
    J = np.zeros((N_OUTPUTS, N_PARAMS))
    for k in range(N_OUTPUTS):
        J[k, N_FEATURES * k: N_FEATURES * (k + 1)] = g[k] * x
        J[k, N_OUTPUTS * N_FEATURES + k] = g[k]
    return J
