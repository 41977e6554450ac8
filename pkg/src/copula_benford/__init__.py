"""Wrapped log-product densities of copula-coupled variables and their distance from Benford's law."""

from .copulas import CopulaSpec, copula_cdf, copula_density, conditional_cdf
from .marginals import Custom, Exponential, LogMarginal, Normal, ParetoLog, Uniform01, log_cdf, log_pdf, tail_window
from .metrics import (
    BenfordReport,
    build_report,
    chi_square_digits,
    chi_square_grid,
    l1_benford_distance,
    l1_copula_norm,
    markov_bound,
)
from .presets import pairing
from .sampler import sample_copula, sample_products
from .wrapped import (
    CertificateError,
    TruncationWindow,
    WrappedPdfEstimate,
    digit_probs_direct,
    make_window,
    wrapped_pdf_at,
    wrapped_pdf_grid,
)

__version__ = "0.1.0"

__all__ = [
    "BenfordReport",
    "CertificateError",
    "CopulaSpec",
    "Custom",
    "Exponential",
    "LogMarginal",
    "Normal",
    "ParetoLog",
    "TruncationWindow",
    "Uniform01",
    "WrappedPdfEstimate",
    "build_report",
    "chi_square_digits",
    "chi_square_grid",
    "conditional_cdf",
    "copula_cdf",
    "copula_density",
    "digit_probs_direct",
    "l1_benford_distance",
    "l1_copula_norm",
    "log_cdf",
    "log_pdf",
    "make_window",
    "markov_bound",
    "pairing",
    "sample_copula",
    "sample_products",
    "tail_window",
    "wrapped_pdf_at",
    "wrapped_pdf_grid",
]
