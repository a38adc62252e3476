"""Exact samplers and density evaluators for the non-standard laws used by the DA kernels."""

from .basic import (
    InverseGaussianParams,
    cholesky_spd,
    density_asymmetric_laplace,
    density_inverse_gamma,
    density_inverse_gaussian,
    sample_inverse_gamma,
    sample_inverse_gaussian,
    sample_multivariate_normal,
    sample_mvn_canonical,
)
from .gig import density_generalized_inverse_gaussian, sample_generalized_inverse_gaussian
from .logconcave import sample_log_concave
from .polya_gamma import (
    PolyaGammaParams,
    density_polya_gamma,
    polya_gamma_mean,
    sample_polya_gamma,
    sample_polya_gamma_series,
)
from .truncated import density_truncated_normal, sample_truncated_normal, sample_truncated_t

__all__ = [
    "InverseGaussianParams",
    "PolyaGammaParams",
    "cholesky_spd",
    "density_asymmetric_laplace",
    "density_generalized_inverse_gaussian",
    "density_inverse_gamma",
    "density_inverse_gaussian",
    "density_polya_gamma",
    "density_truncated_normal",
    "polya_gamma_mean",
    "sample_generalized_inverse_gaussian",
    "sample_inverse_gamma",
    "sample_inverse_gaussian",
    "sample_log_concave",
    "sample_multivariate_normal",
    "sample_mvn_canonical",
    "sample_polya_gamma",
    "sample_polya_gamma_series",
    "sample_truncated_normal",
    "sample_truncated_t",
]
