"""Seed-driven generation of the covariate / weight-matrix stream.

The covariate x_t follows a 3-dimensional ARMA(2,2) recurrence
``x_t = u_t + Phi1 x_{t-1} + Phi2 x_{t-2} + Theta1 u_{t-1} + Theta2 u_{t-2}``
with Gaussian innovations u_t ~ N(0, SigmaU).  The stage weight matrix is
synthesized from x_t through a noisy linear map followed by a clip/rescale
that pins every entry into [1, inf):

    xi~ = G (x + delta * delta_scale) + (B x) * eps      (elementwise noise)
    entry = max(clip_floor, xi~) / scale + shift
    A = entry.reshape(3, 4)                              (row-major)

Streams are pure functions of (config, seed, horizon): all randomness comes
from one PCG64 generator with a fixed draw order per stage (u, then delta,
then eps), so a seed fully determines the stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError

_PHI1 = np.array([
    [0.5, -0.9, 0.0],
    [1.1, -0.7, 0.0],
    [0.0, 0.0, 0.5],
])
_PHI2 = np.array([
    [0.0, -0.5, 0.0],
    [-0.5, 0.0, 0.0],
    [0.0, 0.0, 0.0],
])
_THETA1 = np.array([
    [0.4, 0.8, 0.0],
    [-1.1, -0.3, 0.0],
    [0.0, 0.0, 0.0],
])
_THETA2 = np.array([
    [0.0, -0.8, 0.0],
    [-1.1, 0.0, 0.0],
    [0.0, 0.0, 0.0],
])
_SIGMA_U = np.array([
    [1.0, 0.5, 0.0],
    [0.5, 1.2, 0.5],
    [0.0, 0.5, 0.8],
])
_G_PATTERN = np.array([
    [0.8, 0.1, 0.1],
    [0.1, 0.8, 0.1],
    [0.1, 0.1, 0.8],
])
_B_PATTERN = np.array([
    [0, -1, -1],
    [-1, 0, -1],
    [-1, -1, 0],
    [0, -1, 1],
    [-1, 0, 1],
    [-1, 1, 0],
    [0, 1, -1],
    [1, 0, -1],
    [1, -1, 0],
    [0, 1, 1],
    [1, 0, 1],
    [1, 1, 0],
], dtype=float)


@dataclass(frozen=True)
class ArmaConfig:
    """Constants of the data-generating process (defaults are the benchmark's)."""

    phi1: np.ndarray = field(default_factory=lambda: _PHI1.copy())
    phi2: np.ndarray = field(default_factory=lambda: _PHI2.copy())
    theta1: np.ndarray = field(default_factory=lambda: _THETA1.copy())
    theta2: np.ndarray = field(default_factory=lambda: _THETA2.copy())
    sigma_u: np.ndarray = field(default_factory=lambda: _SIGMA_U.copy())
    g: np.ndarray = field(default_factory=lambda: 2.5 * np.vstack([_G_PATTERN] * 4))
    b: np.ndarray = field(default_factory=lambda: 7.5 * _B_PATTERN.copy())
    clip_floor: float = -100.0
    scale: float = 100.0
    shift: float = 2.0
    delta_scale: float = 0.25

    def __post_init__(self):
        for name in ("phi1", "phi2", "theta1", "theta2", "sigma_u"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.shape != (3, 3) or not np.isfinite(m).all():
                raise ValueError(f"{name} must be a finite 3x3 matrix")
            object.__setattr__(self, name, m)
        g = np.asarray(self.g, dtype=float)
        bmat = np.asarray(self.b, dtype=float)
        if g.shape != (12, 3) or bmat.shape != (12, 3):
            raise ValueError("g and b must be 12x3 matrices")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "b", bmat)
        if not np.allclose(self.sigma_u, self.sigma_u.T):
            raise ValueError("sigma_u must be symmetric")
        if np.linalg.eigvalsh(self.sigma_u).min() < -1e-10:
            raise ValueError("sigma_u must be positive semidefinite")

    def innovation_factor(self) -> np.ndarray:
        """Lower-triangular-ish factor L with L L^T = sigma_u.

        Cholesky when positive definite; an eigendecomposition factor for the
        semidefinite case (e.g. sigma_u = 0, used to switch noise off).
        """
        try:
            return np.linalg.cholesky(self.sigma_u)
        except np.linalg.LinAlgError:
            vals, vecs = np.linalg.eigh(self.sigma_u)
            vals = np.clip(vals, 0.0, None)
            return vecs * np.sqrt(vals)


@dataclass
class ArmaState:
    """Lagged covariates and innovations; zero lags at the start of a stream."""

    x_prev: np.ndarray = field(default_factory=lambda: np.zeros(3))
    x_prev2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    u_prev: np.ndarray = field(default_factory=lambda: np.zeros(3))
    u_prev2: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass(frozen=True)
class StageDatum:
    """One observation pair: stage index, covariate, and true weight matrix."""

    t: int
    x: np.ndarray
    A: np.ndarray


def arma_step(state: ArmaState, config: ArmaConfig, u_t) -> tuple[np.ndarray, ArmaState]:
    """Advance the recurrence one stage; returns x_t and the shifted state."""
    u_t = np.asarray(u_t, dtype=float)
    if u_t.shape != (3,):
        raise ValueError("innovation must have 3 components")
    lags = (state.x_prev, state.x_prev2, state.u_prev, state.u_prev2)
    if not all(np.isfinite(v).all() for v in (u_t, *lags)):
        raise NumericError("arma_step requires finite lags and innovation")
    x_t = (u_t + config.phi1 @ state.x_prev + config.phi2 @ state.x_prev2
           + config.theta1 @ state.u_prev + config.theta2 @ state.u_prev2)
    new_state = ArmaState(x_prev=x_t, x_prev2=state.x_prev, u_prev=u_t, u_prev2=state.u_prev)
    return x_t, new_state


def synthesize_weights(x, delta, eps, config: ArmaConfig) -> np.ndarray:
    """Weight matrix from covariate x and the stage noise (delta, eps).

    delta perturbs the covariate inside the linear map (3 components); eps
    scales the heteroscedastic term elementwise (12 components).  Entries land
    in [1 + ... , inf): the clip floor maps to exactly
    ``clip_floor/scale + shift`` (= 1.0 for the defaults).
    """
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if x.shape != (3,) or delta.shape != (3,) or eps.shape != (12,):
        raise ValueError("expected x:3, delta:3, eps:12")
    if not (np.isfinite(x).all() and np.isfinite(delta).all() and np.isfinite(eps).all()):
        raise NumericError("synthesize_weights requires finite inputs")
    raw = config.g @ (x + delta * config.delta_scale) + (config.b @ x) * eps
    entries = np.maximum(config.clip_floor, raw) / config.scale + config.shift
    return entries.reshape(3, 4)


def generate_stream(config: ArmaConfig, seed: int, horizon: int, burn_in: int = 0) -> list[StageDatum]:
    """Deterministic length-`horizon` stream of (x_t, A_t) pairs.

    Per stage the generator consumes, in order: 3 standard normals for u_t
    (colored by the sigma_u factor), 3 for delta, 12 for eps.  Burn-in stages
    consume draws and advance the recurrence but are discarded.
    """
    if horizon < 0 or burn_in < 0:
        raise ValueError("horizon and burn_in must be nonnegative")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.PCG64(ss))
    factor = config.innovation_factor()
    state = ArmaState()
    stream = []
    for t in range(-burn_in, horizon):
        u_t = factor @ rng.standard_normal(3)
        x_t, state = arma_step(state, config, u_t)
        delta = rng.standard_normal(3)
        eps = rng.standard_normal(12)
        if t < 0:
            continue
        A_t = synthesize_weights(x_t, delta, eps, config)
        stream.append(StageDatum(t=t, x=x_t, A=A_t))
    return stream


STREAM_CSV_HEADER = ("t,x1,x2,x3,"
                     "a11,a12,a13,a14,a21,a22,a23,a24,a31,a32,a33,a34")


def write_stream_csv(stream, path) -> None:
    """Stream export: one row per stage, floats at 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(STREAM_CSV_HEADER + "\n")
        for d in stream:
            cells = [str(d.t)]
            cells += [f"{v:.17g}" for v in d.x]
            cells += [f"{v:.17g}" for v in d.A.reshape(-1)]
            fh.write(",".join(cells) + "\n")
