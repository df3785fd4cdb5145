"""Observed information, Wald intervals and likelihood-ratio tests.

Second derivatives of the log-likelihood are assembled from the per-
observation factors

    T_{j,k,l,m}(x) = x^(alpha j) {log(beta x)}^k {1 - p e^-u}^-l e^(-m u)

with parameters ordered (p, beta, alpha).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from statistics import NormalDist

import numpy as np
from scipy.special import gammaincc

from .distribution import WGParams, _as_params
from .errors import ConvergenceError, DomainError, UnsupportedError
from .fit import EMConfig, FitResult, as_sample, fit_eg, fit_exponential, fit_weibull

PARAM_NAMES = ("p", "beta", "alpha")


def t_factor(x, theta, j: int, k: int, l: int, m: int):
    """T_{j,k,l,m}(x; theta) for indices in {0, 1, 2}."""
    for idx in (j, k, l, m):
        if idx not in (0, 1, 2):
            raise DomainError("t_factor indices must lie in {0, 1, 2}")
    theta = _as_params(theta)
    p, beta, alpha = theta.as_tuple()
    xs = np.asarray(x, dtype=float)
    if np.any(xs <= 0):
        raise DomainError("x must be > 0")
    u = np.exp(alpha * np.log(beta * xs))
    e = np.exp(-u)
    out = xs ** (alpha * j) * np.log(beta * xs) ** k * (1.0 - p * e) ** (-l) * e ** m
    return float(out) if xs.ndim == 0 else out


@dataclass
class ObservedInfo:
    """J_n = -Hessian of the log-likelihood, rows/columns (p, beta, alpha)."""

    matrix: np.ndarray
    inverse: np.ndarray | None
    eigenvalues: np.ndarray
    message: str = ""

    @property
    def positive_definite(self) -> bool:
        return bool(np.all(self.eigenvalues > 0))

    @property
    def invertible(self) -> bool:
        return self.inverse is not None

    def standard_errors(self) -> np.ndarray:
        if self.inverse is None:
            raise UnsupportedError(self.message or "observed information is singular")
        return np.sqrt(np.diag(self.inverse))


def hessian(theta, sample) -> np.ndarray:
    """Analytic Hessian of the log-likelihood, ordered (p, beta, alpha)."""
    theta = _as_params(theta)
    sample = as_sample(sample)
    p, beta, alpha = theta.as_tuple()
    n = sample.n
    x = sample.xs

    def s(j, k, l, m):
        return float(np.sum(t_factor(x, theta, j, k, l, m)))

    ba = beta ** alpha
    d_pp = 2.0 * s(0, 0, 2, 2) - n / (1.0 - p) ** 2
    d_pa = -2.0 * ba * (p * s(1, 1, 2, 2) + s(1, 1, 1, 1))
    d_pb = -2.0 * alpha * beta ** (alpha - 1.0) * (p * s(1, 0, 2, 2) + s(1, 0, 1, 1))
    d_aa = -n / alpha ** 2 + (2.0 * p * p * ba * ba * s(2, 2, 2, 2)
                              + 2.0 * p * ba * ba * s(2, 2, 1, 1)
                              - ba * s(1, 2, 0, 0)
                              - 2.0 * p * ba * s(1, 2, 1, 1))
    mixed = np.sum((alpha * t_factor(x, theta, 1, 1, 0, 0) + t_factor(x, theta, 1, 0, 0, 0))
                   * (1.0 + 2.0 * p * t_factor(x, theta, 0, 0, 1, 1)))
    d_ba = (n / beta - beta ** (alpha - 1.0) * float(mixed)
            + 2.0 * p * alpha * beta ** (2.0 * alpha - 1.0) * (p * s(2, 1, 2, 2) + s(2, 1, 1, 1)))
    d_bb = (-n * alpha / beta ** 2
            - alpha * (alpha - 1.0) * beta ** (alpha - 2.0) * (s(1, 0, 0, 0) + 2.0 * p * s(1, 0, 1, 1))
            + 2.0 * alpha ** 2 * beta ** (2.0 * alpha - 2.0) * p * (p * s(2, 0, 2, 2) + s(2, 0, 1, 1)))
    return np.array([
        [d_pp, d_pb, d_pa],
        [d_pb, d_bb, d_ba],
        [d_pa, d_ba, d_aa],
    ])


def observed_info(theta, sample) -> ObservedInfo:
    """Observed information at ``theta``; the inverse is None when singular."""
    matrix = -hessian(theta, sample)
    eig = np.linalg.eigvalsh(matrix)
    inverse = None
    message = ""
    if np.all(eig > 0):
        inverse = np.linalg.inv(matrix)
    else:
        try:
            cond = np.linalg.cond(matrix)
            if np.isfinite(cond) and cond < 1e14:
                inverse = np.linalg.inv(matrix)
                message = "observed information is not positive definite"
            else:
                message = "observed information is singular"
        except np.linalg.LinAlgError:
            message = "observed information is singular"
    return ObservedInfo(matrix, inverse, eig, message)


@dataclass(frozen=True)
class ConfidenceInterval:
    parameter: str
    estimate: float
    lo: float
    hi: float
    level: float
    std_error: float
    clamped: bool = False

    def as_dict(self) -> dict:
        return {
            "parameter": self.parameter, "estimate": self.estimate, "lo": self.lo,
            "hi": self.hi, "level": self.level, "std_error": self.std_error,
            "clamped": self.clamped,
        }


def normal_quantile(prob: float) -> float:
    return NormalDist().inv_cdf(prob)


def confidence_intervals(info: ObservedInfo, theta_hat, level: float = 0.95) -> list[ConfidenceInterval]:
    """Wald intervals estimate ± z sqrt(diag(J^-1)), one per parameter.

    Intervals are clipped to the parameter space (p in [0, 1), beta and
    alpha positive) and flagged when that happens. A p estimate on the
    boundary p = 0 raises :class:`UnsupportedError`: the normal
    approximation does not hold there.
    """
    theta_hat = _as_params(theta_hat)
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    if theta_hat.p <= 0.0:
        raise UnsupportedError("p estimate lies on the boundary p = 0; Wald intervals are not valid")
    if not info.positive_definite:
        raise UnsupportedError(info.message or "observed information is not positive definite")
    z = normal_quantile(0.5 + level / 2.0)
    se = info.standard_errors()
    out = []
    for name, est, s in zip(PARAM_NAMES, theta_hat.as_tuple(), se):
        lo, hi = est - z * s, est + z * s
        clamped = False
        if lo <= 0.0:
            lo, clamped = 0.0, True
        if name == "p" and hi >= 1.0:
            hi, clamped = math.nextafter(1.0, 0.0), True
        out.append(ConfidenceInterval(name, float(est), float(lo), float(hi), level, float(s), clamped))
    return out


class NullModel(str, Enum):
    EG = "EG"                    # alpha = 1
    WEIBULL = "Weibull"          # p = 0
    EXPONENTIAL = "exponential"  # alpha = 1 and p = 0


_NULL_DF = {NullModel.EG: 1, NullModel.WEIBULL: 1, NullModel.EXPONENTIAL: 2}


@dataclass
class LRTestResult:
    statistic: float
    df: int
    p_value: float
    null_model: NullModel
    null_estimates: WGParams
    null_loglik: float
    full_loglik: float
    boundary: bool = False
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "null_model": self.null_model.value,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "null_estimates": dict(zip(PARAM_NAMES, self.null_estimates.as_tuple())),
            "null_loglik": self.null_loglik,
            "full_loglik": self.full_loglik,
            "boundary": self.boundary,
            "notes": list(self.notes),
        }


def chi2_sf(w: float, df: int) -> float:
    """Upper tail of chi-square(df) via the regularized incomplete gamma Q(df/2, w/2)."""
    if w <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, w / 2.0))


def lr_test(sample, null_model, full_fit: FitResult, config: EMConfig | None = None) -> LRTestResult:
    """w = 2 (ℓ_full - ℓ_null) against a sub-model, chi-square reference.

    Nulls that pin p = 0 sit on the edge of the parameter space, so the
    chi-square p-value is conservative there; ``boundary`` marks this.
    """
    sample = as_sample(sample)
    null_model = NullModel(null_model)
    if not full_fit.converged:
        raise ConvergenceError("full-model fit did not converge; LR test not computed")
    config = config or EMConfig(tol=1e-8, max_iter=5000)
    fitter = {NullModel.EG: fit_eg, NullModel.WEIBULL: fit_weibull,
              NullModel.EXPONENTIAL: fit_exponential}[null_model]
    null_fit = fitter(sample, config)
    if not null_fit.converged:
        raise ConvergenceError(
            f"{null_model.value} null fit did not converge after {null_fit.iterations} "
            f"iterations (last estimate {null_fit.estimates})")
    w = 2.0 * (full_fit.loglik - null_fit.loglik)
    df = _NULL_DF[null_model]
    notes = []
    if w < 0:
        notes.append(f"negative statistic {w:.3g}: null fit is more likely than the full fit")
    boundary = null_model is not NullModel.EG
    if boundary:
        notes.append("null value p = 0 is on the boundary; chi-square p-value is conservative")
    return LRTestResult(w, df, chi2_sf(w, df), null_model, null_fit.estimates,
                        null_fit.loglik, full_fit.loglik, boundary, notes)
