"""Baseline learners: Adam with step decay, the Frobenius-norm fit loss for
predict-then-optimize, the score-function decision gradient for
decision-focused learning, and categorical particle selection for the
stochastic-predictor baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericError
from .knapsack import DEFAULT_Z_CAP, KnapsackInstance, evaluate_reward, hindsight_optimum, solve_deterministic
from .predictor import N_PARAMS, jacobian, predict
from .smc import ParticleCloud, _categorical


@dataclass(frozen=True)
class AdamState:
    """Adam accumulators plus the per-stage decayed learning-rate schedule.

    beta1/beta2/epsilon are the standard defaults; the effective rate at step
    t (0-based) is ``lr0 * decay**t``.
    """

    m: np.ndarray = field(default_factory=lambda: np.zeros(N_PARAMS))
    v: np.ndarray = field(default_factory=lambda: np.zeros(N_PARAMS))
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    lr0: float = 0.1
    decay: float = 0.99


def adam_step(state: AdamState, grad) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns the parameter increment."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != state.m.shape:
        raise ValueError("gradient shape mismatch")
    if not np.isfinite(grad).all():
        raise NumericError("gradient must be finite")
    t = state.step
    lr = state.lr0 * state.decay ** t
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1 ** (t + 1))
    v_hat = v / (1.0 - state.beta2 ** (t + 1))
    delta = -lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return delta, replace(state, m=m, v=v, step=t + 1)


def mse_loss_grad(theta, x, A_true) -> tuple[float, np.ndarray]:
    """Frobenius-norm prediction error and its gradient w.r.t. theta.

    The loss is ``||A_true - predict(theta, x)||_F`` (the root, not its
    square).  At the kink (loss below 1e-12) the gradient is defined as 0.
    """
    A_true = np.asarray(A_true, dtype=float)
    pred = predict(theta, x)
    diff = (pred - A_true).reshape(-1)
    loss = float(np.sqrt(np.sum(diff * diff)))
    if loss < 1e-12:
        return loss, np.zeros(N_PARAMS)
    grad = jacobian(theta, x).T @ (diff / loss)
    return loss, grad


@dataclass(frozen=True)
class ScoreGradConfig:
    """Perturbation count and scale for the score-function gradient."""

    k: int = 20
    noise_std: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def score_function_grad(A_hat, A_true, inst: KnapsackInstance, cfg: ScoreGradConfig,
                        rng: np.random.Generator, z_cap: int = DEFAULT_Z_CAP,
                        hindsight_value: float | None = None,
                        loss_fn=None, perturbations=None) -> np.ndarray:
    """Monte Carlo estimate of the decision-loss gradient w.r.t. the predicted
    matrix: average of ``loss(P(A_hat + eps)) * eps`` over K Gaussian
    perturbations of the 12 entries.

    By default the loss of a perturbed prediction is the regret of the
    deterministic decision solved at it, evaluated under A_true.  `loss_fn`
    replaces that map (used to validate unbiasedness on analytic surfaces);
    `perturbations` injects fixed noise instead of drawing from `rng`.
    """
    A_hat = np.asarray(A_hat, dtype=float)
    A_true = np.asarray(A_true, dtype=float)
    if perturbations is None:
        perturbations = cfg.noise_std * rng.standard_normal((cfg.k, 12))
    else:
        perturbations = np.asarray(perturbations, dtype=float)
        if perturbations.ndim != 2 or perturbations.shape[1] != 12:
            raise ValueError("perturbations must have shape (k, 12)")
    if loss_fn is None:
        if hindsight_value is None:
            hindsight_value = hindsight_optimum(A_true, inst).value

        def loss_fn(A_pert):
            dec = solve_deterministic(A_pert, inst, z_cap)
            return hindsight_value - evaluate_reward(dec.z, A_true, inst)[0]

    flat = A_hat.reshape(-1)
    grad = np.zeros(12)
    for eps in perturbations:
        grad += float(loss_fn((flat + eps).reshape(3, 4))) * eps
    return grad / len(perturbations)


def dfl_param_grad(theta, x, A_true, inst: KnapsackInstance, cfg: ScoreGradConfig,
                   rng: np.random.Generator, z_cap: int = DEFAULT_Z_CAP,
                   hindsight_value: float | None = None) -> np.ndarray:
    """Score-function decision gradient chained through the predictor Jacobian."""
    g = score_function_grad(predict(theta, x), A_true, inst, cfg, rng,
                            z_cap=z_cap, hindsight_value=hindsight_value)
    return jacobian(theta, x).T @ g


def bgs_select(cloud: ParticleCloud, rng: np.random.Generator) -> int:
    """Categorical draw over the cloud weights by inverse CDF."""
    cum = np.cumsum(cloud.weights)
    return _categorical(cum, rng.random())
