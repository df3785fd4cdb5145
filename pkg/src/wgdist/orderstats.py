"""Order statistics of WG samples: densities and moments.

Moments of X_{i:n} are available three ways: the double series obtained by
expanding (1 - p e^-u)^-(n+1) (``orderstat_moment_expr10``), the
alternative series built on survival-function powers
(``orderstat_moment_expr11``) and direct quadrature.

Both series contain an alternating finite sum over k whose terms cancel by
many orders of magnitude when i (or n - i) is large, so they are summed in
extended precision with mpmath; double precision loses most digits at
i = n = 15.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .distribution import _as_params, _prepare, _finish, median
from .errors import DomainError
from .numerics import DEFAULT_QUADRATURE, Quadrature, integrate, log_beta

DEFAULT_J_MAX = 100
ORACLE_J_MAX = 10_000
WORKING_DIGITS = 60


@dataclass(frozen=True)
class OrderStatSpec:
    """Rank i of n (1-based) and moment order r."""

    i: int
    n: int
    r: int = 1

    def __post_init__(self):
        if not (isinstance(self.i, (int, np.integer)) and isinstance(self.n, (int, np.integer))):
            raise DomainError("i and n must be integers")
        if not 1 <= self.i <= self.n:
            raise DomainError(f"need 1 <= i <= n, got i={self.i}, n={self.n}")
        if int(self.r) != self.r or self.r < 1:
            raise DomainError(f"moment order r must be a positive integer, got {self.r}")


@dataclass(frozen=True)
class SeriesMomentResult:
    value: float
    terms_used: int
    truncation_bound: float


def _log_orderstat_pdf(theta, spec: OrderStatSpec, x):
    p, beta, alpha = theta.as_tuple()
    i, n = spec.i, spec.n
    logbx = np.log(beta * x)
    u = np.exp(alpha * logbx)
    out = (math.log(alpha) + alpha * math.log(beta) - log_beta(i, n - i + 1)
           + (alpha - 1.0) * np.log(x) - (n - i + 1) * u
           - (n + 1) * np.log1p(-p * np.exp(-u)))
    if p > 0:
        out = out + (n - i + 1) * math.log1p(-p)
    if i > 1:
        out = out + (i - 1) * np.log(-np.expm1(-u))
    return out


def orderstat_pdf(theta, spec: OrderStatSpec, x):
    """Density of the i-th smallest of n iid WG draws."""
    theta = _as_params(theta)
    x, scalar = _prepare(x)
    return _finish(np.exp(_log_orderstat_pdf(theta, spec, x)), scalar)


def orderstat_pdf_mixture(theta, spec: OrderStatSpec, x: float, j_max: int) -> float:
    """Partial sum of the Weibull order-statistic mixture for f_{i:n}(x).

        f_{i:n}(x) = (1-p)^(n-i+1) Σ_j c_j C(n+j, n) p^j g_{i:n+j}(x),
        c_j = n! (n+j-i)! / ((n+j)! (n-i)!)

    with g_{i:m} the Weibull(beta, alpha) order-statistic density. The
    factor c_j depends on j and so sits inside the sum.
    """
    theta = _as_params(theta)
    if j_max < 0:
        raise DomainError("j_max must be >= 0")
    if not x > 0:
        raise DomainError("x must be > 0")
    p, beta, alpha = theta.as_tuple()
    i, n = spec.i, spec.n
    u = (beta * x) ** alpha
    log_g_common = (math.log(alpha) + alpha * math.log(beta) + (alpha - 1.0) * math.log(x)
                    + ((i - 1) * math.log(-math.expm1(-u)) if i > 1 else 0.0))
    lead = (n - i + 1) * math.log1p(-p) if p > 0 else 0.0
    terms = []
    for j in range(j_max + 1):
        if p == 0 and j > 0:
            break
        m = n + j
        log_c = (math.lgamma(n + 1) + math.lgamma(m - i + 1)
                 - math.lgamma(m + 1) - math.lgamma(n - i + 1))
        log_binom = math.lgamma(m + 1) - math.lgamma(n + 1) - math.lgamma(j + 1)
        log_pj = j * math.log(p) if j > 0 else 0.0
        log_g = log_g_common - log_beta(i, m - i + 1) - (m - i + 1) * u
        terms.append(math.exp(lead + log_c + log_binom + log_pj + log_g))
    return math.fsum(terms)


def _mp_params(theta, r):
    p, beta, alpha = (mp.mpf(v) for v in theta.as_tuple())
    return p, beta, alpha, mp.mpf(r) / alpha


def orderstat_moment_expr10(theta, spec: OrderStatSpec, j_max: int = DEFAULT_J_MAX,
                            digits: int = WORKING_DIGITS) -> SeriesMomentResult:
    """E(X_{i:n}^r) from the series with denominators (n+j+k-i+1)^(r/alpha+1).

    The j sum runs to ``j_max`` (stopping early once further terms cannot
    change the result at working precision). ``truncation_bound`` bounds
    the omitted tail: each j term equals C(n+j,n) p^j D_j with D_j > 0
    decreasing in j, so the tail is at most D_J Σ_{j>J} C(n+j,n) p^j.
    """
    theta = _as_params(theta)
    if j_max < 0:
        raise DomainError("j_max must be >= 0")
    i, n, r = spec.i, spec.n, spec.r
    with mp.workdps(digits):
        p, beta, alpha, s = _mp_params(theta, r)
        k_coef = [(-1) ** k * math.comb(i - 1, k) for k in range(i)]
        expo = s + 1
        eps = mp.mpf(10) ** (-digits)
        total = mp.mpf(0)
        weight_sum = mp.mpf(0)
        weight = mp.mpf(1)  # C(n+j, n) p^j
        last_d = mp.mpf(0)
        used = 0
        for j in range(j_max + 1):
            if j > 0:
                weight = weight * p * (n + j) / j
            d = mp.fsum(c * mp.power(n + j + k - i + 1, -expo) for k, c in enumerate(k_coef))
            term = weight * d
            total += term
            weight_sum += weight
            last_d = d
            used = j + 1
            if j >= 10 and abs(term) <= eps * abs(total):
                break
        if p > 0:
            tail_weight = max(mp.power(1 - p, -(n + 1)) - weight_sum, mp.mpf(0))
        else:
            tail_weight = mp.mpf(0)
        front = (mp.power(1 - p, n - i + 1) * mp.gamma(s + 1)
                 / (mp.beta(i, n - i + 1) * mp.power(beta, r)))
        value = front * total
        bound = abs(front) * abs(last_d) * tail_weight
        return SeriesMomentResult(float(value), used, float(bound))


def orderstat_moment_expr11(theta, spec: OrderStatSpec, j_max: int = DEFAULT_J_MAX,
                            digits: int = WORKING_DIGITS) -> SeriesMomentResult:
    """E(X_{i:n}^r) from powers of the survival function.

        Γ(r/alpha+1) / ((-1)^(n-i+1) beta^r)
          Σ_j Σ_{k=n-i+1}^{n} (-1)^k C(n,k) C(k-1,n-i) C(k+j-1,k-1)
                               p^j (1-p)^k / (k+j)^(r/alpha)

    ``truncation_bound`` is Σ_k |coef_k| (k+J+1)^(-r/alpha) times the
    exact tail of Σ_j C(k+j-1,k-1) p^j, which ignores any cancellation.
    """
    theta = _as_params(theta)
    if j_max < 0:
        raise DomainError("j_max must be >= 0")
    i, n, r = spec.i, spec.n, spec.r
    ks = list(range(n - i + 1, n + 1))
    with mp.workdps(digits):
        p, beta, alpha, s = _mp_params(theta, r)
        coef = [(-1) ** k * math.comb(n, k) * math.comb(k - 1, n - i) * mp.power(1 - p, k)
                for k in ks]
        weights = [mp.mpf(1) for _ in ks]  # C(k+j-1, k-1) p^j
        weight_sums = [mp.mpf(0) for _ in ks]
        eps = mp.mpf(10) ** (-digits)
        total = mp.mpf(0)
        envelope = mp.mpf(0)
        used = 0
        for j in range(j_max + 1):
            if j > 0:
                weights = [w * p * (k + j - 1) / j for w, k in zip(weights, ks)]
            parts = [c * w * mp.power(k + j, -s) for c, w, k in zip(coef, weights, ks)]
            term = mp.fsum(parts)
            total += term
            envelope += mp.fsum(abs(x) for x in parts)
            weight_sums = [ws + w for ws, w in zip(weight_sums, weights)]
            used = j + 1
            if j >= 10 and mp.fsum(abs(x) for x in parts) <= eps * abs(envelope):
                break
        front = mp.gamma(s + 1) / ((-1) ** (n - i + 1) * mp.power(beta, r))
        bound = mp.mpf(0)
        if p > 0:
            for c, k, ws in zip(coef, ks, weight_sums):
                tail = max(mp.power(1 - p, -k) - ws, mp.mpf(0))
                bound += abs(c) * mp.power(k + used, -s) * tail
        value = front * total
        return SeriesMomentResult(float(value), used, float(abs(front) * bound))


def orderstat_moment_quadrature(theta, spec: OrderStatSpec,
                                q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """E(X_{i:n}^r) as the integral of x^r f_{i:n}(x) over (0, inf)."""
    theta = _as_params(theta)
    r = spec.r

    def integrand(x):
        return math.exp(r * math.log(x) + float(_log_orderstat_pdf(theta, spec, x)))

    return integrate(integrand, 0.0, math.inf, q, scale=median(theta))
