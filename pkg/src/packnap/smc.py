"""Particle machinery: Gibbs reweighting, ESS, Liu-West rejuvenation, and the
discrete Gibbs-posterior / free-energy diagnostics.

A particle cloud approximates the posterior over predictor parameters by N
weighted particles.  After each stage the weights are multiplied by the
pseudo-likelihood ``exp(-lam * loss)`` and renormalized (in log space, so long
horizons cannot underflow).  When the effective sample size falls to
``ess_threshold * N`` the cloud is rejuvenated: each particle takes a few
Metropolis-Hastings steps using a shrunk Gaussian-mixture proposal built from
the cloud itself, with acceptance ratio ``exp(lam * (loss_cur - loss_prop))``,
and the weights reset to uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .knapsack import (DEFAULT_Z_CAP, KnapsackInstance, ScenarioSet,
                       evaluate_reward, hindsight_optimum, solve_chance,
                       solve_deterministic)
from .predictor import N_PARAMS, predict_batch

SIMPLEX_TOL = 1e-12
_EXP_CLIP = 700.0  # exp() overflow guard for ratio outputs


@dataclass(frozen=True)
class SmcConfig:
    """Sampler constants.  Defaults are the benchmark settings."""

    n_particles: int = 20
    lam: float = 1e-4
    shrinkage: float = 0.9
    ess_threshold: float = 0.5
    mh_steps: int = 3
    prior_std: float = 1.0
    jitter_floor: float = 1e-9

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError("shrinkage must lie in (0, 1]")
        if not 0.0 < self.ess_threshold <= 1.0:
            raise ValueError("ess_threshold must lie in (0, 1]")
        if self.mh_steps < 0:
            raise ValueError("mh_steps must be nonnegative")
        if self.prior_std < 0 or self.jitter_floor < 0:
            raise ValueError("prior_std and jitter_floor must be nonnegative")


@dataclass
class ParticleCloud:
    """N weighted parameter particles plus the trial's MH random stream."""

    thetas: np.ndarray   # (N, dim)
    weights: np.ndarray  # (N,) on the probability simplex
    rng: np.random.Generator

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.thetas.ndim != 2 or len(self.thetas) != len(self.weights):
            raise ValueError("thetas must be (N, dim) matching weights")
        if (self.weights < 0).any() or abs(self.weights.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError("weights must lie on the probability simplex")

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class LiuWestKernel:
    """Shrunk Gaussian-mixture proposal: component means, weights, covariance."""

    means: np.ndarray            # (N, dim), a*theta_i + (1-a)*mean
    mixture_weights: np.ndarray  # (N,)
    H: np.ndarray                # (dim, dim), (1-a^2)*cov + jitter*I
    factor: np.ndarray           # lower-triangular, factor @ factor.T == H


def init_cloud(config: SmcConfig, seed, dim: int = N_PARAMS) -> ParticleCloud:
    """Fresh cloud: i.i.d. N(0, prior_std^2) particles with uniform weights.

    `seed` may be an int or a numpy SeedSequence; two child streams are
    spawned, one consumed here for the prior draw and one kept on the cloud
    for rejuvenation.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    prior_ss, mh_ss = ss.spawn(2)
    prior_rng = np.random.Generator(np.random.PCG64(prior_ss))
    thetas = config.prior_std * prior_rng.standard_normal((config.n_particles, dim))
    weights = np.full(config.n_particles, 1.0 / config.n_particles)
    return ParticleCloud(thetas, weights, np.random.Generator(np.random.PCG64(mh_ss)))


def ess(weights) -> float:
    """Effective sample size 1 / sum(w^2); lies in [1, N]."""
    w = np.asarray(weights, dtype=float)
    return float(1.0 / np.sum(w * w))


def reweight(cloud: ParticleCloud, losses, lam: float) -> ParticleCloud:
    """Multiply weights by exp(-lam * loss) and renormalize (log space)."""
    losses = np.asarray(losses, dtype=float)
    if losses.shape != (cloud.n,):
        raise ValueError("losses must have one entry per particle")
    if not np.isfinite(losses).all() or (losses < 0).any():
        raise NumericError("losses must be finite and nonnegative")
    with np.errstate(divide="ignore"):
        logw = np.where(cloud.weights > 0, np.log(cloud.weights), -np.inf)
    logw = logw - lam * losses
    shift = logw.max()
    if not np.isfinite(shift):
        raise NumericError("all particle weights vanished")
    w = np.exp(logw - shift)
    w /= w.sum()
    return ParticleCloud(cloud.thetas, w, cloud.rng)


def liu_west_params(cloud: ParticleCloud, a: float, jitter_floor: float) -> LiuWestKernel:
    """Mixture proposal from the cloud: means a*theta_i + (1-a)*mean, shared
    covariance (1-a^2)*cov plus an escalating diagonal jitter.

    The weighted covariance of N particles in dim dimensions is rank-deficient
    whenever N <= dim, so the jitter starts at
    max(jitter_floor, 1e-10 * trace / dim) and multiplies by 10 (at most 8
    times) until the Cholesky factorization succeeds.
    """
    thetas, w = cloud.thetas, cloud.weights
    dim = thetas.shape[1]
    mean = w @ thetas
    centered = thetas - mean
    cov = (w[:, None] * centered).T @ centered
    base = (1.0 - a * a) * cov
    jitter = max(jitter_floor, 1e-10 * np.trace(base) / dim)
    for _ in range(9):
        H = base + jitter * np.eye(dim)
        try:
            factor = np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            jitter *= 10.0
            continue
        means = a * thetas + (1.0 - a) * mean
        return LiuWestKernel(means, w.copy(), H, factor)
    raise NumericError("covariance factorization failed at maximum jitter")


def mh_accept_ratio(loss_proposed: float, loss_current: float, lam: float) -> float:
    """Acceptance ratio exp(lam * (loss_current - loss_proposed))."""
    if not (np.isfinite(loss_proposed) and np.isfinite(loss_current)):
        raise NumericError("losses must be finite")
    return float(np.exp(min(lam * (loss_current - loss_proposed), _EXP_CLIP)))


def _categorical(cum_weights, u):
    idx = int(np.searchsorted(cum_weights, u, side="right"))
    return min(idx, len(cum_weights) - 1)


def mh_rejuvenate(cloud: ParticleCloud, kernel: LiuWestKernel, loss_of,
                  config: SmcConfig, current_losses=None) -> ParticleCloud:
    """Move every particle through `mh_steps` MH steps under the mixture
    proposal, then reset the weights to uniform.

    Draw order per proposal is fixed (component uniform, Gaussian vector,
    acceptance uniform) so a seeded run is reproducible.  `current_losses`
    lets the caller reuse the stage losses already computed for reweighting;
    otherwise the callback is evaluated once per particle up front.
    """
    n, dim = cloud.thetas.shape
    if kernel.means.shape != (n, dim):
        raise ValueError("kernel does not match cloud")
    thetas = cloud.thetas.copy()
    if current_losses is None:
        losses = np.array([float(loss_of(thetas[i])) for i in range(n)])
    else:
        losses = np.asarray(current_losses, dtype=float).copy()
    if not np.isfinite(losses).all():
        bad = int(np.argmax(~np.isfinite(losses)))
        raise NumericError(f"non-finite loss for particle {bad}")
    cum = np.cumsum(kernel.mixture_weights)
    rng = cloud.rng
    for i in range(n):
        for _ in range(config.mh_steps):
            comp = _categorical(cum, rng.random())
            proposal = kernel.means[comp] + kernel.factor @ rng.standard_normal(dim)
            loss_prop = float(loss_of(proposal))
            if not np.isfinite(loss_prop):
                raise NumericError(f"non-finite proposal loss for particle {i}")
            ratio = mh_accept_ratio(loss_prop, losses[i], config.lam)
            if ratio >= rng.random():
                thetas[i] = proposal
                losses[i] = loss_prop
    weights = np.full(n, 1.0 / n)
    return ParticleCloud(thetas, weights, rng)


def full_history_accept_ratio(theta_proposed, theta_current, history,
                              prior_log_density, proposal_log_density,
                              loss_of, lam: float) -> float:
    """Exact MH ratio against the full-history Gibbs target.

    ``r = pi0(t') exp(-lam sum_i l(t', d_i)) q(t|t') /
          pi0(t)  exp(-lam sum_i l(t,  d_i)) q(t'|t)``

    computed in log space; a zero prior density at either point yields 0 or
    +inf in ratio semantics.  This is the expensive cross-check for the
    incremental single-stage ratio used during rejuvenation.
    """
    history = list(history)
    if not history:
        raise ValueError("history must be non-empty")
    sum_prop = sum(float(loss_of(theta_proposed, d)) for d in history)
    sum_cur = sum(float(loss_of(theta_current, d)) for d in history)
    log_num = (float(prior_log_density(theta_proposed)) - lam * sum_prop
               + float(proposal_log_density(theta_current, theta_proposed)))
    log_den = (float(prior_log_density(theta_current)) - lam * sum_cur
               + float(proposal_log_density(theta_proposed, theta_current)))
    if np.isinf(log_num) and np.isinf(log_den):
        raise NumericError("prior density vanishes at both points")
    log_r = log_num - log_den
    if log_r == -np.inf:
        return 0.0
    if log_r == np.inf:
        return np.inf
    return float(np.exp(min(log_r, _EXP_CLIP)))


def gibbs_posterior_discrete(prior_weights, losses, lam: float) -> np.ndarray:
    """Posterior proportional to prior * exp(-lam * loss) on K atoms."""
    prior = np.asarray(prior_weights, dtype=float)
    losses = np.asarray(losses, dtype=float)
    if prior.shape != losses.shape:
        raise ValueError("prior and losses must have equal length")
    if (prior < 0).any() or abs(prior.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError("prior must lie on the probability simplex")
    if not np.isfinite(losses).all():
        raise NumericError("losses must be finite")
    with np.errstate(divide="ignore"):
        logp = np.where(prior > 0, np.log(prior), -np.inf) - lam * losses
    logp -= logp.max()
    post = np.exp(logp)
    return post / post.sum()


def free_energy(pi, prior, losses, lam: float) -> float:
    """Expected loss plus KL(pi || prior) / lam, with 0 log 0 = 0."""
    pi = np.asarray(pi, dtype=float)
    prior = np.asarray(prior, dtype=float)
    losses = np.asarray(losses, dtype=float)
    if ((pi > 0) & (prior <= 0)).any():
        raise ValueError("pi must be absolutely continuous w.r.t. prior")
    pos = pi > 0
    kl = float(np.sum(pi[pos] * np.log(pi[pos] / prior[pos])))
    return float(pi @ losses) + kl / lam


@dataclass(frozen=True)
class MixabilityRecord:
    """Per-stage diagnostic of the aggregation inequalities (not asserted)."""

    agg_loss: float
    exp_loss: float
    mix_bound: float
    holds_mixable: bool
    holds_convex_relax: bool


def mixability_check(cloud: ParticleCloud, datum, inst: KnapsackInstance,
                     lam: float, alpha: float = 0.9,
                     z_cap: int = DEFAULT_Z_CAP) -> MixabilityRecord:
    """Compare the aggregated decision's loss to the mixability bound
    -(1/lam) log E[exp(-lam loss)] and the weaker bound E[loss] on one stage."""
    preds = predict_batch(cloud.thetas, datum.x)
    hs = hindsight_optimum(datum.A, inst).value
    agg = solve_chance(ScenarioSet(preds, cloud.weights, alpha), inst, z_cap)
    agg_loss = hs - evaluate_reward(agg.z, datum.A, inst)[0]
    losses = np.empty(cloud.n)
    for i in range(cloud.n):
        dec = solve_deterministic(preds[i], inst, z_cap)
        losses[i] = hs - evaluate_reward(dec.z, datum.A, inst)[0]
    exp_loss = float(cloud.weights @ losses)
    arg = -lam * losses
    shift = arg.max()
    mix_bound = float(-(shift + np.log(np.sum(cloud.weights * np.exp(arg - shift)))) / lam)
    tol = 1e-9
    return MixabilityRecord(
        agg_loss=float(agg_loss),
        exp_loss=exp_loss,
        mix_bound=mix_bound,
        holds_mixable=bool(agg_loss <= mix_bound + tol),
        holds_convex_relax=bool(agg_loss <= exp_loss + tol),
    )
