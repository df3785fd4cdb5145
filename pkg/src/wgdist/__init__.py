"""Weibull-geometric lifetime distribution toolkit."""

__version__ = "0.1.0"

from .distribution import (WGParams, cdf, hazard, log_pdf, median, mode, pdf, quantile,
                           sample_compound, sample_inverse, survival)
from .fit import EMConfig, FitResult, Sample, fit_em, loglik, score
from .inference import confidence_intervals, lr_test, observed_info
from .moments import moment_report, raw_moment

__all__ = [
    "WGParams", "pdf", "log_pdf", "cdf", "survival", "hazard", "quantile", "median", "mode",
    "sample_inverse", "sample_compound", "raw_moment", "moment_report", "Sample", "EMConfig",
    "FitResult", "fit_em", "loglik", "score", "observed_info", "confidence_intervals", "lr_test",
]
