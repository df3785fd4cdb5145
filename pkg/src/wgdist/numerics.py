"""Numerical primitives used by the rest of the package.

Special functions, a capped positive-series summer for the polylogarithm,
a bracketing root finder and an adaptive quadrature wrapper that maps
semi-infinite ranges onto the unit interval.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import optimize as _sp_optimize

from .errors import AccuracyWarning, BracketError, DomainError, TruncationWarning

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class SeriesPolicy:
    """Stopping rule for slowly converging positive series."""

    rel_tol: float = 1e-12
    max_terms: int = 100_000
    min_terms: int = 10

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


@dataclass(frozen=True)
class Quadrature:
    """Tolerances and subdivision budget for :func:`integrate`."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 500

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_SERIES = SeriesPolicy()
DEFAULT_QUADRATURE = Quadrature()


class SeriesSum(NamedTuple):
    value: float
    terms: int
    converged: bool


class QuadResult(NamedTuple):
    value: float
    abs_error: float
    converged: bool


# --- special functions -----------------------------------------------------

def gamma_fn(a: float) -> float:
    """Gamma function for positive real arguments."""
    if not a > 0:
        raise DomainError(f"gamma_fn requires a > 0, got {a}")
    return math.gamma(a)


def log_gamma(a: float) -> float:
    if not a > 0:
        raise DomainError(f"log_gamma requires a > 0, got {a}")
    return math.lgamma(a)


def log_beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"beta function requires positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta_fn(a: float, b: float) -> float:
    """B(a, b) = Γ(a)Γ(b)/Γ(a+b), evaluated through log-gamma."""
    return math.exp(log_beta(a, b))


def digamma_one() -> float:
    """ψ(1), the negative of the Euler-Mascheroni constant."""
    return -EULER_GAMMA


def polylog_series(p: float, a: float, policy: SeriesPolicy = DEFAULT_SERIES,
                   chunk: int = 4096) -> SeriesSum:
    """Sum L(p; a) = Σ_{j≥1} p^j j^{-a} and report how the sum terminated.

    Terms are generated in numpy blocks. Summation stops at the first
    index j ≥ ``policy.min_terms`` where a geometric bound on the
    remaining tail, term·r/(1-r) with r the next term ratio, drops below
    ``rel_tol`` times the running sum.
    """
    if not 0 <= p < 1:
        raise DomainError(f"polylog requires 0 <= p < 1, got {p}")
    if p == 0:
        return SeriesSum(0.0, 0, True)
    log_p = math.log(p)
    parts: list[np.ndarray] = []
    running = 0.0
    start = 1
    while start <= policy.max_terms:
        stop = min(start + chunk, policy.max_terms + 1)
        j = np.arange(start, stop, dtype=float)
        terms = np.exp(j * log_p - a * np.log(j))
        partial = running + np.cumsum(terms)
        # successive-term ratios tend to p; max(ratio, p) bounds all later ones
        ratio = np.maximum(p * np.exp(-a * np.log1p(1.0 / j)), p)
        with np.errstate(divide="ignore"):
            tail = np.where(ratio < 1.0, terms * ratio / (1.0 - ratio), np.inf)
        done = np.nonzero((tail <= policy.rel_tol * partial) & (j >= policy.min_terms))[0]
        if done.size:
            k = done[0]
            parts.append(terms[: k + 1])
            return SeriesSum(math.fsum(np.concatenate(parts)), int(j[k]), True)
        parts.append(terms)
        running = partial[-1]
        start = stop
    return SeriesSum(math.fsum(np.concatenate(parts)), policy.max_terms, False)


def polylog(p: float, a: float, policy: SeriesPolicy = DEFAULT_SERIES) -> float:
    """Polylogarithm L(p; a) for real 0 <= p < 1.

    Emits :class:`TruncationWarning` if the term cap is reached first.
    """
    res = polylog_series(p, a, policy)
    if not res.converged:
        warnings.warn(
            f"polylog({p}, {a}) not converged after {res.terms} terms",
            TruncationWarning, stacklevel=2)
    return res.value


# --- root finding ----------------------------------------------------------

def find_root(f: Callable[[float], float], lo: float, hi: float,
              tol: float = 1e-12) -> float:
    """Root of ``f`` inside [lo, hi] by Brent's bisection/secant hybrid.

    Raises :class:`BracketError` when f(lo) and f(hi) share a sign.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo!r}, f(hi)={fhi!r}")
    return float(_sp_optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                                     maxiter=500))


# --- quadrature ------------------------------------------------------------

def integrate_with_error(f: Callable[[float], float], lo: float, hi: float = math.inf,
                         q: Quadrature = DEFAULT_QUADRATURE, scale: float = 1.0,
                         points=None) -> QuadResult:
    """Adaptive quadrature of ``f`` over [lo, hi]; ``hi`` may be +inf.

    A semi-infinite range is mapped to [0, 1) with x = lo + scale·u/(1-u),
    so ``scale`` should be a length typical of where ``f`` lives.
    ``points`` (finite-range only) are passed to QUADPACK as break points.
    """
    if not scale > 0:
        raise DomainError("scale must be positive")
    if math.isinf(hi):
        def g(u):
            w = 1.0 - u
            val = f(lo + scale * u / w)
            return val * scale / (w * w) if val != 0 else 0.0
        a, b = 0.0, 1.0
        brk = None
        if points is not None:
            brk = [(x - lo) / (scale + x - lo) for x in points if x > lo]
    else:
        g, a, b, brk = f, lo, hi, points
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        out = _sp_integrate.quad(g, a, b, epsabs=q.abs_tol, epsrel=q.rel_tol,
                                 limit=q.max_subdivisions, points=brk, full_output=1)
    value, err = out[0], out[1]
    converged = len(out) == 3
    return QuadResult(float(value), float(err), converged)


def integrate(f: Callable[[float], float], lo: float, hi: float = math.inf,
              q: Quadrature = DEFAULT_QUADRATURE, scale: float = 1.0, points=None) -> float:
    """Like :func:`integrate_with_error` but returns the value only.

    An :class:`AccuracyWarning` is raised as a warning when QUADPACK
    reports that it could not reach the requested tolerance.
    """
    res = integrate_with_error(f, lo, hi, q, scale, points)
    if not res.converged:
        warnings.warn(
            f"quadrature on [{lo}, {hi}] did not reach tolerance "
            f"(estimate {res.value!r}, error {res.abs_error:.3g})",
            AccuracyWarning, stacklevel=2)
    return res.value


# --- randomness ------------------------------------------------------------

def make_rng(seed=None) -> np.random.Generator:
    """The single seam through which the package obtains randomness."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
