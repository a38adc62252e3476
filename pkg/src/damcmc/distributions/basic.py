"""Inverse-Gaussian, inverse-gamma, multivariate normal and asymmetric Laplace."""

import math

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from ..errors import InvalidParameterError, NotSPDError

__all__ = [
    "InverseGaussianParams",
    "sample_inverse_gaussian",
    "density_inverse_gaussian",
    "sample_inverse_gamma",
    "density_inverse_gamma",
    "cholesky_spd",
    "sample_multivariate_normal",
    "sample_mvn_canonical",
    "density_asymmetric_laplace",
    "SPD_PIVOT_TOL",
]

SPD_PIVOT_TOL = 1e-12


class InverseGaussianParams:
    """Inverse-Gaussian with mean ``kappa`` and shape ``psi``."""

    __slots__ = ("kappa", "psi")

    def __init__(self, kappa, psi):
        if not (math.isfinite(kappa) and math.isfinite(psi)):
            raise InvalidParameterError("inverse-Gaussian parameters must be finite")
        if kappa <= 0 or psi <= 0:
            raise InvalidParameterError("inverse-Gaussian needs kappa > 0 and psi > 0")
        self.kappa = float(kappa)
        self.psi = float(psi)


def _check_finite_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} must be finite")
    if np.any(arr <= 0):
        raise InvalidParameterError(f"{name} must be > 0")
    return arr


def sample_inverse_gaussian(kappa, psi, rng, size=None):
    """Draw from IG(kappa, psi), density sqrt(psi/(2 pi)) u^{-3/2} exp(-psi (u-kappa)^2 / (2 kappa^2 u))."""
    kappa = _check_finite_positive("kappa", kappa)
    psi = _check_finite_positive("psi", psi)
    return rng.wald(kappa, psi, size=size)


def density_inverse_gaussian(u, kappa, psi):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.sqrt(psi / (2 * math.pi)) * u ** -1.5 * np.exp(-psi * (u - kappa) ** 2 / (2 * kappa ** 2 * u))
    return np.where(u > 0, d, 0.0)


def sample_inverse_gamma(shape, rate, rng, size=None):
    """1 / Gamma(shape, rate); density proportional to x^{-shape-1} exp(-rate/x)."""
    shape = _check_finite_positive("shape", shape)
    rate = _check_finite_positive("rate", rate)
    return rate / rng.standard_gamma(shape, size=size)


def density_inverse_gamma(x, shape, rate):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = shape * np.log(rate) - gammaln(shape) - (shape + 1) * np.log(x) - rate / x
    return np.where(x > 0, np.exp(logd), 0.0)


def cholesky_spd(a):
    """Lower Cholesky factor; raises NotSPDError if a pivot falls below
    ``SPD_PIVOT_TOL`` times the largest diagonal entry."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSPDError("matrix must be square")
    if np.abs(a - a.T).max() > 1e-10 * max(1.0, np.abs(a).max()):
        raise NotSPDError("matrix is not symmetric")
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError("Cholesky factorization failed") from exc
    scale = np.max(np.diag(a))
    if np.min(np.diag(chol)) ** 2 < SPD_PIVOT_TOL * scale:
        raise NotSPDError("matrix is numerically singular")
    return chol


def sample_multivariate_normal(mean, matrix, rng, parameterization="covariance"):
    """One Gaussian draw with a single Cholesky factorization.

    ``parameterization`` is ``"covariance"`` or ``"precision"``.
    """
    mean = np.asarray(mean, dtype=float)
    chol = cholesky_spd(np.atleast_2d(matrix))
    eps = rng.standard_normal(mean.shape[0])
    if parameterization == "covariance":
        return mean + chol @ eps
    if parameterization == "precision":
        return mean + solve_triangular(chol.T, eps, lower=False, check_finite=False)
    raise InvalidParameterError(f"unknown parameterization {parameterization!r}")


def sample_mvn_canonical(h, precision, rng, scale=1.0):
    """Draw N(Q^{-1} h, scale * Q^{-1}) for precision Q.

    Returns ``(draw, mean, chol)`` so callers can reuse the factor.
    """
    chol = cholesky_spd(precision)
    w = solve_triangular(chol, h, lower=True, check_finite=False)
    mean = solve_triangular(chol.T, w, lower=False, check_finite=False)
    eps = rng.standard_normal(mean.shape[0])
    draw = mean + math.sqrt(scale) * solve_triangular(chol.T, eps, lower=False, check_finite=False)
    return draw, mean, chol


def density_asymmetric_laplace(eps, alpha):
    """alpha (1 - alpha) exp(-rho_alpha(eps)), rho_alpha(x) = x (alpha - 1{x < 0})."""
    if not 0 < alpha < 1:
        raise InvalidParameterError("alpha must lie in (0, 1)")
    eps = np.asarray(eps, dtype=float)
    rho = eps * (alpha - (eps < 0))
    out = alpha * (1 - alpha) * np.exp(-rho)
    return float(out) if out.ndim == 0 else out
