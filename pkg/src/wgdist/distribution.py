"""Weibull-geometric distribution WG(p, beta, alpha).

X is the minimum of N iid Weibull(beta, alpha) lifetimes where N is
geometric on {1, 2, ...} with P(N = n) = (1 - p) p^(n-1). Writing
u = (beta x)^alpha,

    f(x) = alpha beta^alpha (1-p) x^(alpha-1) e^(-u) / (1 - p e^(-u))^2
    F(x) = (1 - e^(-u)) / (1 - p e^(-u))

p = 0 is admitted and gives the plain Weibull law; alpha = 1 gives the
exponential-geometric law.

All evaluation functions accept scalars or array-likes and return a float
for scalar input, an ndarray otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DomainError, UnsupportedError
from .numerics import find_root, make_rng

__all__ = [
    "WGParams", "pdf", "log_pdf", "cdf", "survival", "hazard", "quantile",
    "median", "mode", "weibull_pdf", "eg_pdf", "mixture_pdf", "sample_inverse",
    "sample_compound",
]


@dataclass(frozen=True)
class WGParams:
    """Parameter triple (p, beta, alpha).

    p is the geometric mixing probability (0 <= p < 1), beta the scale
    (units of 1/x) and alpha the Weibull shape.
    """

    p: float
    beta: float
    alpha: float

    def __post_init__(self):
        p, beta, alpha = float(self.p), float(self.beta), float(self.alpha)
        if not 0.0 <= p < 1.0:
            raise DomainError(f"p must satisfy 0 <= p < 1, got {self.p}")
        if not (beta > 0 and math.isfinite(beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta}")
        if not (alpha > 0 and math.isfinite(alpha)):
            raise DomainError(f"alpha must be positive and finite, got {self.alpha}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_sequence(cls, values: Iterable[float]) -> "WGParams":
        p, beta, alpha = (float(v) for v in values)
        return cls(p, beta, alpha)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p, self.beta, self.alpha)

    def replace(self, **changes) -> "WGParams":
        values = {"p": self.p, "beta": self.beta, "alpha": self.alpha}
        values.update(changes)
        return WGParams(**values)


def _as_params(theta) -> WGParams:
    if isinstance(theta, WGParams):
        return theta
    return WGParams.from_sequence(theta)


def _finish(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _prepare(x, allow_zero: bool = False):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("x contains NaN")
    if allow_zero:
        if np.any(arr < 0):
            raise DomainError("x must be >= 0")
    elif np.any(arr <= 0):
        raise DomainError("x must be > 0")
    return arr, arr.ndim == 0


def _u(theta: WGParams, x: np.ndarray) -> np.ndarray:
    """(beta x)^alpha through exp(alpha log(beta x)); zero at x = 0."""
    with np.errstate(divide="ignore"):
        return np.exp(theta.alpha * np.log(theta.beta * x))


def log_pdf(theta, x):
    """Log density, finite for every x > 0."""
    theta = _as_params(theta)
    x, scalar = _prepare(x)
    p, beta, alpha = theta.as_tuple()
    logbx = np.log(beta * x)
    u = np.exp(alpha * logbx)
    out = (math.log(alpha) + alpha * math.log(beta) + math.log1p(-p)
           + (alpha - 1.0) * np.log(x) - u - 2.0 * np.log1p(-p * np.exp(-u)))
    return _finish(out, scalar)


def pdf(theta, x):
    """Density f(x). At x = 0 the limit is returned when it is finite."""
    theta = _as_params(theta)
    arr, scalar = _prepare(x, allow_zero=True)
    out = np.zeros_like(arr, dtype=float)
    pos = arr > 0
    if np.any(~pos):
        if theta.alpha < 1:
            raise DomainError("pdf is unbounded at x = 0 when alpha < 1")
        if theta.alpha == 1:
            out[~pos] = theta.beta / (1.0 - theta.p)
    if np.any(pos):
        out[pos] = np.exp(log_pdf(theta, arr[pos]))
    return _finish(out, scalar)


def cdf(theta, x):
    """F(x) = (1 - e^-u)/(1 - p e^-u); F(0) = 0."""
    theta = _as_params(theta)
    x, scalar = _prepare(x, allow_zero=True)
    u = _u(theta, x)
    e = np.exp(-u)
    out = -np.expm1(-u) / (1.0 - theta.p * e)
    return _finish(out, scalar)


def survival(theta, x):
    """S(x) = (1-p) e^-u / (1 - p e^-u); S(0) = 1."""
    theta = _as_params(theta)
    x, scalar = _prepare(x, allow_zero=True)
    e = np.exp(-_u(theta, x))
    out = (1.0 - theta.p) * e / (1.0 - theta.p * e)
    return _finish(out, scalar)


def hazard(theta, x):
    """h(x) = alpha beta^alpha x^(alpha-1) / (1 - p e^-u)."""
    theta = _as_params(theta)
    x, scalar = _prepare(x)
    p, beta, alpha = theta.as_tuple()
    logbx = np.log(beta * x)
    u = np.exp(alpha * logbx)
    out = alpha * beta * np.exp((alpha - 1.0) * logbx) / (1.0 - p * np.exp(-u))
    return _finish(out, scalar)


def quantile(theta, gamma):
    """Inverse cdf: x = beta^-1 {log[(1 - p gamma)/(1 - gamma)]}^(1/alpha)."""
    theta = _as_params(theta)
    g = np.asarray(gamma, dtype=float)
    if np.any(~((g > 0) & (g < 1))):
        raise DomainError("quantile level must lie strictly inside (0, 1)")
    # (1 - p g)/(1 - g) = 1 + g (1 - p)/(1 - g)
    t = np.log1p(g * (1.0 - theta.p) / (1.0 - g))
    out = np.exp(np.log(t) / theta.alpha) / theta.beta
    return _finish(out, g.ndim == 0)


def median(theta) -> float:
    """quantile(theta, 0.5) = beta^-1 {log(2 - p)}^(1/alpha)."""
    return quantile(theta, 0.5)


def _mode_equation(p: float, alpha: float):
    c = (alpha - 1.0) / alpha
    return lambda u: u + p * math.exp(-u) * (u + c) - c


def mode(theta, tol: float = 1e-14) -> float:
    """Location of the density maximum, defined for alpha > 1.

    Solves u + p e^-u (u + c) = c with c = (alpha-1)/alpha; the left side
    is strictly increasing in u, equals p c <= c at 0 and is >= c at
    u = c, so [0, c] always brackets the unique root.
    """
    theta = _as_params(theta)
    if theta.alpha <= 1:
        raise UnsupportedError("the density is monotone decreasing for alpha <= 1; no interior mode")
    c = (theta.alpha - 1.0) / theta.alpha
    u0 = find_root(_mode_equation(theta.p, theta.alpha), 0.0, c, tol=tol)
    return u0 ** (1.0 / theta.alpha) / theta.beta


def weibull_pdf(x, beta: float, alpha: float):
    """Weibull density g(x; beta, alpha) = alpha beta^alpha x^(alpha-1) e^-(beta x)^alpha."""
    x, scalar = _prepare(x)
    logbx = np.log(beta * x)
    out = alpha * beta * np.exp((alpha - 1.0) * logbx - np.exp(alpha * logbx))
    return _finish(out, scalar)


def eg_pdf(x, p: float, beta: float):
    """Exponential-geometric density beta (1-p) e^-bx / (1 - p e^-bx)^2."""
    x, scalar = _prepare(x)
    e = np.exp(-beta * x)
    out = beta * (1.0 - p) * e / (1.0 - p * e) ** 2
    return _finish(out, scalar)


class MixtureValue(NamedTuple):
    value: float
    tail_bound: float


def mixture_pdf(theta, x: float, j_max: int) -> MixtureValue:
    """Truncated Weibull-mixture form of the density.

    Returns (1-p) Σ_{j<=j_max} p^j g(x; beta (j+1)^(1/alpha), alpha) with
    the exact size of the omitted tail, which is a bound on the error.
    """
    theta = _as_params(theta)
    if x <= 0:
        raise DomainError("x must be > 0")
    p, beta, alpha = theta.as_tuple()
    j = np.arange(j_max + 1, dtype=float)
    scales = beta * (j + 1.0) ** (1.0 / alpha)
    logbx = np.log(scales * x)
    comps = alpha * scales * np.exp((alpha - 1.0) * logbx - np.exp(alpha * logbx))
    weights = (1.0 - p) * p ** j
    value = math.fsum(weights * comps)
    # tail: (1-p) alpha beta^alpha x^(alpha-1) e^-u Σ_{j>J} (j+1) q^j, q = p e^-u
    u = (beta * x) ** alpha
    q = p * math.exp(-u)
    big_j = j_max
    tail_sum = q ** (big_j + 1) * ((big_j + 2) - (big_j + 1) * q) / (1.0 - q) ** 2
    lead = (1.0 - p) * alpha * beta ** alpha * x ** (alpha - 1.0) * math.exp(-u)
    return MixtureValue(value, lead * tail_sum)


def sample_inverse(theta, n: int, rng=None) -> np.ndarray:
    """n draws by inversion, x = quantile(U) with U ~ uniform(0, 1)."""
    theta = _as_params(theta)
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = make_rng(rng)
    u = rng.random(n)
    # rng.random() lies in [0, 1); 0 maps to the lower support point
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    return np.asarray(quantile(theta, u), dtype=float).reshape(n)


def sample_geometric(p: float, n: int, rng=None) -> np.ndarray:
    """N on {1, 2, ...} with P(N = k) = (1-p) p^(k-1), by inversion."""
    rng = make_rng(rng)
    if p == 0:
        return np.ones(n, dtype=np.int64)
    u = 1.0 - rng.random(n)  # (0, 1]
    counts = np.ceil(np.log(u) / math.log(p))
    return np.maximum(counts, 1).astype(np.int64)


def sample_compound(theta, n: int, rng=None) -> np.ndarray:
    """n draws of min(Y_1..Y_N), N geometric and Y_i Weibull(beta, alpha)."""
    theta = _as_params(theta)
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = make_rng(rng)
    counts = sample_geometric(theta.p, n, rng)
    total = int(counts.sum())
    y = rng.standard_exponential(total) ** (1.0 / theta.alpha) / theta.beta
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return np.minimum.reduceat(y, starts)
