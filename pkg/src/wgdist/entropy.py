"""Rényi and Shannon entropies of WG(p, beta, alpha).

Expanding (1 - p e^-u)^(-2 gamma) and integrating term by term gives

    ∫ f^gamma = alpha^(gamma-1) (1-p)^gamma beta^(gamma-1) Γ(m) / Γ(2 gamma)
                Σ_j p^j Γ(2 gamma + j) / (j! (gamma + j)^m),
    m = ((alpha - 1) gamma + 1) / alpha,

which is what :func:`renyi_entropy` sums. Shannon entropy is computed by
quadrature of -f log f. :func:`shannon_paper_formula` and
:func:`renyi_paper_formula` evaluate the published closed forms as printed
so they can be compared against those values; neither agrees with the
true entropy in general.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distribution import _as_params, log_pdf, median
from .errors import DomainError, TruncationWarning
from .numerics import (DEFAULT_QUADRATURE, DEFAULT_SERIES, Quadrature, SeriesPolicy,
                       digamma_one, integrate)


class EntropyMethod(str, Enum):
    RENYI_SERIES = "renyi_series"
    RENYI_QUADRATURE = "renyi_quadrature"
    RENYI_PAPER_FORMULA = "renyi_paper_formula"
    SHANNON_QUADRATURE = "shannon_quadrature"
    SHANNON_PAPER_FORMULA = "shannon_paper_formula"


@dataclass(frozen=True)
class EntropyResult:
    value: float
    method: EntropyMethod
    delta: float | None = None  # value minus the quadrature reference, when computed

    def as_dict(self) -> dict:
        out = {"value": self.value, "method": self.method.value}
        if self.delta is not None:
            out["delta_vs_quadrature"] = self.delta
        return out


def _check_gamma(gamma: float) -> None:
    if not gamma > 0 or gamma == 1:
        raise DomainError(f"Rényi order must be positive and != 1, got {gamma}")


def _log_series_power_integral(theta, gamma: float, policy: SeriesPolicy) -> float:
    """log ∫ f^gamma dx by the term-by-term series."""
    p, beta, alpha = theta.as_tuple()
    m = ((alpha - 1.0) * gamma + 1.0) / alpha
    log_front = ((gamma - 1.0) * (math.log(alpha) + math.log(beta))
                 + gamma * math.log1p(-p) + math.lgamma(m) - math.lgamma(2.0 * gamma))
    if p == 0:
        return log_front + math.lgamma(2.0 * gamma) - m * math.log(gamma)
    log_p = math.log(p)
    log_terms = []
    running = -math.inf
    converged = False
    def log_term(j):
        return (j * log_p + math.lgamma(2.0 * gamma + j) - math.lgamma(j + 1.0)
                - m * math.log(gamma + j))

    lt = log_term(0)
    for j in range(policy.max_terms):
        log_terms.append(lt)
        running = np.logaddexp(running, lt)
        nxt = log_term(j + 1)
        # term ratios settle down towards p; bound the tail geometrically
        ratio = math.exp(nxt - lt)
        if j >= policy.min_terms and ratio < 1.0:
            log_tail = nxt - math.log1p(-ratio)
            if log_tail < math.log(policy.rel_tol) + running:
                converged = True
                break
        lt = nxt
    if not converged:
        warnings.warn(f"Rényi series not converged after {policy.max_terms} terms",
                      TruncationWarning, stacklevel=3)
    lt = np.array(log_terms)
    top = lt.max()
    return log_front + top + math.log(math.fsum(np.exp(lt - top)))


def power_integral_quadrature(theta, gamma: float,
                              q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """∫ f(x)^gamma dx over (0, inf) by adaptive quadrature."""
    theta = _as_params(theta)
    return integrate(lambda x: math.exp(gamma * log_pdf(theta, x)), 0.0, math.inf, q,
                     scale=median(theta))


def renyi_entropy(theta, gamma: float, policy: SeriesPolicy = DEFAULT_SERIES) -> EntropyResult:
    """Rényi entropy (1 - gamma)^-1 log ∫ f^gamma.

    The series is used when (alpha - 1)(gamma - 1) >= 0. Outside that
    region a warning is issued and quadrature is used instead.
    """
    theta = _as_params(theta)
    _check_gamma(gamma)
    alpha = theta.alpha
    if (alpha - 1.0) * gamma + 1.0 <= 0:
        raise DomainError("∫ f^gamma diverges at 0 when (alpha - 1) gamma + 1 <= 0")
    if (alpha - 1.0) * (gamma - 1.0) >= 0:
        log_int = _log_series_power_integral(theta, gamma, policy)
        return EntropyResult(float(log_int / (1.0 - gamma)), EntropyMethod.RENYI_SERIES)
    warnings.warn(
        f"(alpha-1)(gamma-1) < 0 for alpha={alpha}, gamma={gamma}; using quadrature",
        RuntimeWarning, stacklevel=2)
    val = power_integral_quadrature(theta, gamma)
    return EntropyResult(math.log(val) / (1.0 - gamma), EntropyMethod.RENYI_QUADRATURE)


def renyi_paper_formula(theta, gamma: float, policy: SeriesPolicy = DEFAULT_SERIES) -> EntropyResult:
    """The published Rényi closed form, evaluated exactly as printed."""
    theta = _as_params(theta)
    _check_gamma(gamma)
    p, beta, alpha = theta.as_tuple()
    expo = (alpha - 1.0) * (gamma - 1.0) / alpha + 1.0
    log_front = (gamma * (math.log(alpha) + math.log1p(-p))
                 + math.lgamma(gamma * (alpha - 1.0) + 1.0)
                 - (1.0 - gamma) * math.log(beta) - math.lgamma(2.0 * gamma))
    total = 0.0
    for j in range(policy.max_terms):
        log_t = (math.lgamma(2.0 * gamma + j) - math.lgamma(j + 1.0) - expo * math.log(alpha + j))
        if j:
            if p == 0:
                break
            log_t += j * math.log(p)
        t = math.exp(log_t)
        total += t
        if j >= policy.min_terms and t < policy.rel_tol * total:
            break
    value = (log_front + math.log(total)) / (1.0 - gamma)
    ref = math.log(power_integral_quadrature(theta, gamma)) / (1.0 - gamma)
    return EntropyResult(value, EntropyMethod.RENYI_PAPER_FORMULA, value - ref)


def shannon_entropy(theta, q: Quadrature = DEFAULT_QUADRATURE) -> EntropyResult:
    """Shannon entropy -∫ f log f by quadrature."""
    theta = _as_params(theta)

    def integrand(x):
        lf = log_pdf(theta, x)
        return -math.exp(lf) * lf

    value = integrate(integrand, 0.0, math.inf, q, scale=median(theta))
    return EntropyResult(value, EntropyMethod.SHANNON_QUADRATURE)


def shannon_paper_formula(theta) -> EntropyResult:
    """The published Shannon closed form, evaluated as printed.

    -log[alpha beta^alpha (1-p)] - (alpha-1)/alpha psi(1)
        - (1-p)/p [4 - 2p + (3 - 2p) log(1-p)]

    The last term diverges as p -> 0, so p = 0 returns -inf. ``delta``
    holds the difference from :func:`shannon_entropy`.
    """
    theta = _as_params(theta)
    p, beta, alpha = theta.as_tuple()
    base = (-(math.log(alpha) + alpha * math.log(beta) + math.log1p(-p))
            - (alpha - 1.0) / alpha * digamma_one())
    if p == 0:
        value = -math.inf
    else:
        value = base - (1.0 - p) / p * (4.0 - 2.0 * p + (3.0 - 2.0 * p) * math.log1p(-p))
    ref = shannon_entropy(theta).value
    return EntropyResult(value, EntropyMethod.SHANNON_PAPER_FORMULA, value - ref)


def expected_log_one_minus_pq(p: float) -> float:
    """E log(1 - p e^-(beta X)^alpha) = 1 + log(1-p)/p (0 at p = 0)."""
    if not 0 <= p < 1:
        raise DomainError("p must satisfy 0 <= p < 1")
    if p == 0:
        return 0.0
    return 1.0 + math.log1p(-p) / p
