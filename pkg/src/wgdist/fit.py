"""Maximum likelihood for WG(p, beta, alpha) by the EM algorithm.

The latent variable is the geometric count Z behind each observation.
Given current parameters the E-step weight is

    w_i = E(Z | x_i) = (1 + p e^-u_i) / (1 - p e^-u_i),   u_i = (beta x_i)^alpha

and the M-step has the closed forms p = 1 - n / Σ w_i and
beta = (n / Σ w_i x_i^alpha)^(1/alpha), with alpha the root of

    n/alpha + Σ log x_i - n Σ w_i x_i^alpha log x_i / Σ w_i x_i^alpha = 0.

One cycle updates alpha, then beta with the new alpha, then p, all from
weights computed at the old parameters.

Plain EM crawls on these likelihoods (thousands of cycles for the bundled
datasets), so with a stopping rule on the parameter change it can stop
far from the maximum. ``fit_em`` therefore wraps the EM map in SQUAREM
extrapolation by default, with a fallback that keeps every accepted
iterate at least as likely as the plain two-step EM update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp

from .distribution import WGParams, _as_params
from .errors import BracketError, ConvergenceError, DomainError
from .numerics import find_root

ALPHA_LO = 1e-6
P_MAX = 1.0 - 1e-10


@dataclass(frozen=True)
class Sample:
    """A complete (uncensored) sample of positive lifetimes."""

    xs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float).ravel()
        if xs.size < 3:
            raise DomainError(f"need at least 3 observations, got {xs.size}")
        if not np.all(np.isfinite(xs)) or np.any(xs <= 0):
            raise DomainError("observations must be finite and > 0")
        xs.setflags(write=False)
        object.__setattr__(self, "xs", xs)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    @property
    def log_xs(self) -> np.ndarray:
        return np.log(self.xs)


def as_sample(data) -> Sample:
    return data if isinstance(data, Sample) else Sample(data)


@dataclass(frozen=True)
class EMConfig:
    """Controls for :func:`fit_em`.

    ``tol`` applies to the largest absolute parameter change between
    accepted iterates. ``fix_p``/``fix_alpha`` hold a parameter at a given
    value (used for the Weibull and exponential-geometric sub-models).
    """

    tol: float = 1e-4
    max_iter: int = 500
    alpha_bracket_hi: float = 100.0
    init: WGParams | None = None
    accelerate: bool = True
    loglik_tol: float = 1e-10
    fix_p: float | None = None
    fix_alpha: float | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if not self.alpha_bracket_hi > ALPHA_LO:
            raise DomainError("alpha_bracket_hi must exceed the lower bracket end")


@dataclass
class FitResult:
    estimates: WGParams
    loglik: float
    iterations: int
    converged: bool
    loglik_trajectory: list[float]
    latent_weights: np.ndarray
    em_evaluations: int = 0
    message: str = ""
    path: list[tuple[float, float, float]] = field(default_factory=list, repr=False)


def _u(theta: WGParams, log_xs: np.ndarray) -> np.ndarray:
    return np.exp(theta.alpha * (math.log(theta.beta) + log_xs))


def loglik(theta, sample) -> float:
    """ℓ = n[log α + α log β + log(1-p)] + (α-1)Σ log x - Σ u - 2Σ log(1 - p e^-u)."""
    theta = _as_params(theta)
    sample = as_sample(sample)
    p, beta, alpha = theta.as_tuple()
    lx = sample.log_xs
    u = _u(theta, lx)
    n = sample.n
    return float(n * (math.log(alpha) + alpha * math.log(beta) + math.log1p(-p))
                 + (alpha - 1.0) * lx.sum() - u.sum()
                 - 2.0 * np.log1p(-p * np.exp(-u)).sum())


def score(theta, sample) -> np.ndarray:
    """Gradient (∂ℓ/∂p, ∂ℓ/∂β, ∂ℓ/∂α)."""
    theta = _as_params(theta)
    sample = as_sample(sample)
    p, beta, alpha = theta.as_tuple()
    n = sample.n
    lx = sample.log_xs
    lbx = math.log(beta) + lx
    u = np.exp(alpha * lbx)
    e = np.exp(-u)
    ratio = e / (1.0 - p * e)
    boost = 1.0 + 2.0 * p * ratio
    d_p = -n / (1.0 - p) + 2.0 * ratio.sum()
    d_beta = n * alpha / beta - alpha / beta * (u * boost).sum()
    d_alpha = n / alpha + lbx.sum() - (u * lbx * boost).sum()
    return np.array([d_p, d_beta, d_alpha])


def em_weights(theta, sample) -> np.ndarray:
    """E(Z | x_i) = (1 + p e^-u_i)/(1 - p e^-u_i), each >= 1."""
    theta = _as_params(theta)
    sample = as_sample(sample)
    q = theta.p * np.exp(-_u(theta, sample.log_xs))
    return (1.0 + q) / (1.0 - q)


def alpha_equation(sample, weights):
    """Left side of the alpha update equation as a function of alpha."""
    sample = as_sample(sample)
    lx = sample.log_xs
    n = sample.n
    log_w = np.log(weights)
    shift = lx.max()
    sum_lx = lx.sum()

    def eq(alpha: float) -> float:
        # x^alpha scaled by exp(-alpha max log x); the ratio is unchanged
        wx = np.exp(log_w + alpha * (lx - shift))
        return n / alpha + sum_lx - n * float((wx * lx).sum() / wx.sum())

    return eq


def _solve_alpha(sample: Sample, weights: np.ndarray, config: EMConfig) -> float:
    eq = alpha_equation(sample, weights)
    hi = config.alpha_bracket_hi
    for _ in range(9):
        try:
            return find_root(eq, ALPHA_LO, hi, tol=1e-13)
        except BracketError:
            hi *= 2.0
    raise ConvergenceError(
        f"alpha update has no root in [{ALPHA_LO}, {hi / 2.0}]; "
        f"equation values {eq(ALPHA_LO):.4g} and {eq(hi / 2.0):.4g}")


def em_step(theta, sample, config: EMConfig | None = None) -> WGParams:
    """One EM cycle from ``theta``."""
    theta = _as_params(theta)
    sample = as_sample(sample)
    config = config or EMConfig()
    n = sample.n
    w = em_weights(theta, sample)
    if config.fix_alpha is not None:
        alpha = float(config.fix_alpha)
    else:
        alpha = _solve_alpha(sample, w, config)
    log_sum = float(logsumexp(alpha * sample.log_xs, b=w))
    beta = math.exp((math.log(n) - log_sum) / alpha)
    if config.fix_p is not None:
        p = float(config.fix_p)
    else:
        p = min(max(1.0 - n / math.fsum(w), 0.0), P_MAX)
    return WGParams(p, beta, alpha)


def default_init(sample, p0: float = 0.5) -> WGParams:
    """Starting values from a Weibull probability-plot regression.

    Regresses log(-log S_emp) on log x with plotting positions
    (i - 0.5)/n; slope gives alpha, intercept gives beta.
    """
    sample = as_sample(sample)
    xs = np.sort(sample.xs)
    n = xs.size
    surv = 1.0 - (np.arange(1, n + 1) - 0.5) / n
    y = np.log(-np.log(surv))
    slope, intercept = np.polyfit(np.log(xs), y, 1)
    alpha = float(np.clip(slope, 0.05, 50.0))
    beta = float(math.exp(intercept / alpha))
    if not (math.isfinite(beta) and beta > 0):
        beta = 1.0 / float(np.median(xs))
    return WGParams(p0, beta, alpha)


def _start(sample: Sample, config: EMConfig) -> WGParams:
    theta = config.init if config.init is not None else default_init(sample)
    theta = _as_params(theta)
    changes = {}
    if config.fix_p is not None:
        changes["p"] = config.fix_p
    if config.fix_alpha is not None:
        changes["alpha"] = config.fix_alpha
    return theta.replace(**changes) if changes else theta


def _feasible(v: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(v)) and 0.0 <= v[0] <= P_MAX and v[1] > 0 and v[2] > ALPHA_LO)


def fit_em(sample, config: EMConfig | None = None) -> FitResult:
    """Iterate EM until the parameter change drops below ``config.tol``.

    Reaching ``max_iter`` returns a result with ``converged=False``.
    """
    sample = as_sample(sample)
    config = config or EMConfig()
    theta = _start(sample, config)
    ll = loglik(theta, sample)
    traj = [ll]
    path = [theta.as_tuple()]
    evals = 0
    converged = False
    message = "maximum iterations reached"
    it = 0
    for it in range(1, config.max_iter + 1):
        t0 = np.array(theta.as_tuple())
        t1 = em_step(theta, sample, config)
        evals += 1
        if config.accelerate:
            t2 = em_step(t1, sample, config)
            evals += 1
            new, new_ll = t2, loglik(t2, sample)
            r = np.array(t1.as_tuple()) - t0
            v = np.array(t2.as_tuple()) - np.array(t1.as_tuple()) - r
            nv = float(np.linalg.norm(v))
            if nv > 0:
                step = min(-float(np.linalg.norm(r)) / nv, -1.0)
                cand = t0 - 2.0 * step * r + step * step * v
                if step < -1.0 and _feasible(cand):
                    try:
                        t3 = em_step(WGParams.from_sequence(cand), sample, config)
                        evals += 1
                        ll3 = loglik(t3, sample)
                        if ll3 >= new_ll:
                            new, new_ll = t3, ll3
                    except (ConvergenceError, DomainError):
                        pass
        else:
            new, new_ll = t1, loglik(t1, sample)
        change = float(np.max(np.abs(np.array(new.as_tuple()) - t0)))
        d_ll = new_ll - ll
        theta, ll = new, new_ll
        traj.append(ll)
        path.append(theta.as_tuple())
        if change < config.tol:
            converged, message = True, "parameter change below tolerance"
            break
        if abs(d_ll) < config.loglik_tol:
            converged, message = True, "log-likelihood change below tolerance"
            break
    return FitResult(
        estimates=theta,
        loglik=ll,
        iterations=it,
        converged=converged,
        loglik_trajectory=traj,
        latent_weights=em_weights(theta, sample),
        em_evaluations=evals,
        message=message,
        path=path,
    )


def fit_eg(sample, config: EMConfig | None = None) -> FitResult:
    """Exponential-geometric fit: alpha held at 1."""
    config = config or EMConfig()
    return fit_em(sample, replace(config, fix_alpha=1.0, fix_p=None))


def fit_weibull(sample, config: EMConfig | None = None) -> FitResult:
    """Weibull fit: p held at 0, so every weight is 1 and one cycle is exact."""
    config = config or EMConfig()
    return fit_em(sample, replace(config, fix_p=0.0, fix_alpha=None))


def fit_exponential(sample, config: EMConfig | None = None) -> FitResult:
    """Exponential fit: p = 0 and alpha = 1."""
    config = config or EMConfig()
    return fit_em(sample, replace(config, fix_p=0.0, fix_alpha=1.0))

