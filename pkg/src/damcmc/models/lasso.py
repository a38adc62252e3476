"""Bayesian lasso and elastic net via the normal scale-mixture augmentation.

State vector: ``x = (beta_1, ..., beta_p, sigma2)``. The latent vector ``y``
holds the per-coefficient scales y_j.
"""

import math

import numpy as np
from scipy.linalg import solve_triangular

from ..core import AugmentedModel
from ..distributions import cholesky_spd, sample_inverse_gamma, sample_inverse_gaussian
from ..errors import InvalidParameterError
from ._validation import as_design, as_vector, positive

__all__ = [
    "LassoModel",
    "ElasticNetModel",
    "standardize_design",
    "lasso_da_step",
    "elastic_net_da_step",
    "ZERO_COEF_RATIO",
]

# |beta_j| below this multiple of sigma switches to the beta_j = 0 conditional
ZERO_COEF_RATIO = 1e-300


def standardize_design(w, scale=False):
    """Center the columns of ``w``; with ``scale`` also give them unit Euclidean norm."""
    w = as_design(w)
    w = w - w.mean(axis=0)
    if scale:
        norms = np.linalg.norm(w, axis=0)
        if np.any(norms == 0):
            raise InvalidParameterError("cannot scale a constant column")
        w = w / norms
    return w


class _ShrinkageModel:
    """Common machinery; ``lam`` multiplies the L1 term, ``lam2`` the ridge term."""

    def __init__(self, w, z, lam, lam2, alpha, xi, standardize):
        w = as_design(w)
        if standardize:
            w = standardize_design(w, scale=standardize == "scale")
        m = w.shape[0]
        if m < 2:
            raise InvalidParameterError("need at least two observations")
        if np.max(np.abs(w.sum(axis=0))) > 1e-10 * m * max(1.0, np.abs(w).max()):
            raise InvalidParameterError("design columns must be centered (pass standardize=True)")
        self.W = w
        self.z = as_vector(z, m, "z")
        self.z_tilde = self.z - self.z.mean()
        self.lam = positive(lam, "lambda")
        self.lam2 = positive(lam2, "lambda2", allow_zero=True)
        self.alpha = positive(alpha, "alpha", allow_zero=True)
        self.xi = positive(xi, "xi", allow_zero=True)
        self.gram = w.T @ w
        self.wz = w.T @ self.z_tilde
        self.zz = float(self.z_tilde @ self.z_tilde)

    @property
    def n(self):
        return self.W.shape[0]

    @property
    def p(self):
        return self.W.shape[1]

    @property
    def sigma2_shape(self):
        return (self.n - 1) / 2 + self.alpha

    def split(self, x):
        x = np.asarray(x, dtype=float)
        beta, sigma2 = x[: self.p], float(x[self.p])
        if not sigma2 > 0:
            raise InvalidParameterError("sigma2 must be > 0")
        return beta, sigma2

    def draw_latent_item(self, j, x, rng):
        """One scale y_j given (beta, sigma2)."""
        beta, sigma2 = self.split(x)
        return self._draw_scales(np.array([beta[j]]), math.sqrt(sigma2), rng)[0]

    def _draw_scales(self, beta, sigma, rng):
        lam2 = self.lam * self.lam
        y = np.empty(beta.size)
        zero = np.abs(beta) < ZERO_COEF_RATIO * sigma
        if np.any(~zero):
            kappa = self.lam * sigma / np.abs(beta[~zero])
            y[~zero] = 1.0 / sample_inverse_gaussian(kappa, lam2, rng)
        if np.any(zero):
            y[zero] = rng.gamma(0.5, 2.0 / lam2, size=int(zero.sum()))
        return y

    def draw_latent(self, x, rng):
        beta, sigma2 = self.split(x)
        return self._draw_scales(beta, math.sqrt(sigma2), rng)

    def ridge_diagonal(self, y):
        """Diagonal of the prior precision given the scales: lam2 + 1/y_j."""
        return self.lam2 + 1.0 / np.asarray(y, dtype=float)

    def draw_parameters(self, y, rng):
        """sigma2 ~ IG given y with beta integrated out, then beta ~ N given (sigma2, y)."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.p,) or np.any(~(y > 0)):
            raise InvalidParameterError("latent scales must be a positive vector of length p")
        a = self.gram + np.diag(self.ridge_diagonal(y))
        chol = cholesky_spd(a)
        mean = solve_triangular(chol.T, solve_triangular(chol, self.wz, lower=True, check_finite=False),
                                lower=False, check_finite=False)
        rate = 0.5 * max(self.zz - float(self.wz @ mean), 0.0) + self.xi
        sigma2 = float(sample_inverse_gamma(self.sigma2_shape, rate, rng))
        eps = rng.standard_normal(self.p)
        beta = mean + math.sqrt(sigma2) * solve_triangular(chol.T, eps, lower=False, check_finite=False)
        return np.append(beta, sigma2)

    def augmented_model(self):
        return AugmentedModel(self.draw_latent, self.draw_parameters, p=self.p + 1, q=self.p,
                              name=type(self).__name__)

    def blocked_model(self, k):
        """Latent scales split into ``k`` contiguous blocks for the asynchronous sampler.

        The scales are conditionally independent given (beta, sigma2) and
        no block reads the data, so every data subset is empty.
        """
        from ..adda import BlockedAugmentedModel

        if not 1 <= k <= self.p:
            raise InvalidParameterError("block count must lie in [1, p]")
        coords = np.array_split(np.arange(self.p), k)

        def draw_item(j, i, x, rng):
            return self.draw_latent_item(int(coords[j][i]), x, rng)

        return BlockedAugmentedModel(
            k=k,
            block_items=tuple(c.size for c in coords),
            draw_item=draw_item,
            draw_x_given_y=self.draw_parameters,
            x_dim=self.p + 1,
            data_subsets=tuple(() for _ in coords),
            waiver="latent scales factorize given (beta, sigma2) by construction of the mixture",
            name=f"{type(self).__name__}-blocked",
        )

    def initial_state(self):
        return np.append(np.zeros(self.p), max(self.zz / self.n, 1e-8))


class LassoModel(_ShrinkageModel):
    """Linear model z = mu 1 + W beta + noise with the Laplace-type coefficient prior.

    Parameters
    ----------
    w : (m, p) array
        Design with centered columns, or any design when ``standardize`` is set.
    z : (m,) array
        Response.
    lam : float
        Shrinkage parameter, > 0.
    alpha, xi : float
        Inverse-gamma prior on sigma2 (``alpha = xi = 0`` gives 1/sigma2).
    standardize : bool or "scale"
        Center the design columns (and rescale them with ``"scale"``).
    """

    def __init__(self, w, z, lam, alpha=0.0, xi=0.0, standardize=False):
        super().__init__(w, z, lam, 0.0, alpha, xi, standardize)


class ElasticNetModel(_ShrinkageModel):
    """Lasso with an added ridge penalty ``lam2``; ``lam1`` plays the lasso role."""

    def __init__(self, w, z, lam1, lam2, alpha=0.0, xi=0.0, standardize=False):
        super().__init__(w, z, lam1, lam2, alpha, xi, standardize)

    @property
    def lam1(self):
        return self.lam


def lasso_da_step(model, state, rng):
    """One DA iteration (beta, sigma2) -> y -> (beta', sigma2')."""
    return model.draw_parameters(model.draw_latent(state, rng), rng)


def elastic_net_da_step(model, state, rng):
    """Same transition as :func:`lasso_da_step` with prior precision lam2 + 1/y_j."""
    return model.draw_parameters(model.draw_latent(state, rng), rng)
