"""Probit generalized linear mixed model: DA and Haar PX-DA for the random effects.

The fixed effects beta and the variance blocks Lambda_j are inputs; the
chain targets the conditional posterior of the random-effect vector u.
"""

import math

import numpy as np
from scipy.linalg import block_diag, cho_solve

from ..core import AugmentedModel, multiplicative_group
from ..distributions import cholesky_spd, sample_log_concave, sample_mvn_canonical, sample_truncated_normal
from ..errors import InvalidParameterError, SandwichStepError
from ._validation import as_binary, as_design, as_spd, as_vector

__all__ = ["ProbitGlmmModel", "probit_glmm_da_step", "probit_haar_pxda_step", "V1_PSD_TOL"]

V1_PSD_TOL = 1e-10


class ProbitGlmmModel:
    """P(Z_i = 1 | u) = Phi(w_i' beta + v_i' u), u ~ N(0, A(Lambda)).

    Parameters
    ----------
    w : (m, p) array
        Fixed-effect design.
    v : (m, q) array
        Random-effect design.
    beta : (p,) array
        Known fixed effects.
    blocks : sequence of (Lambda_j, R_j)
        A(Lambda) is the direct sum of the Kronecker products Lambda_j (x) R_j.
    z : (m,) array of 0/1
    """

    def __init__(self, w, v, beta, blocks, z):
        self.W = as_design(w)
        self.V = as_design(v, "V")
        m = self.W.shape[0]
        if self.V.shape[0] != m:
            raise InvalidParameterError("W and V need the same number of rows")
        self.beta = as_vector(beta, self.W.shape[1], "beta")
        self.z = as_binary(z, m)
        pieces = []
        for lam, r in blocks:
            lam = np.atleast_2d(np.asarray(lam, dtype=float))
            r = np.atleast_2d(np.asarray(r, dtype=float))
            lam = as_spd(lam, lam.shape[0], "Lambda_j")
            r = as_spd(r, r.shape[0], "R_j")
            pieces.append(np.kron(lam, r))
        if not pieces:
            raise InvalidParameterError("need at least one variance block")
        self.A = block_diag(*pieces)
        q = self.V.shape[1]
        if self.A.shape != (q, q):
            raise InvalidParameterError(f"variance blocks span {self.A.shape[0]} effects but V has {q} columns")
        a_chol = cholesky_spd(self.A)
        self.A_inv = cho_solve((a_chol, True), np.eye(q))
        self.precision = self.V.T @ self.V + self.A_inv
        chol = cholesky_spd(self.precision)
        self.V1 = np.eye(m) - self.V @ cho_solve((chol, True), self.V.T)
        self.V1 = 0.5 * (self.V1 + self.V1.T)
        if np.linalg.eigvalsh(self.V1).min() < -V1_PSD_TOL:
            raise InvalidParameterError("V1 is not positive semidefinite")
        self.offset = self.W @ self.beta
        self._v1_offset = self.V1 @ self.offset

    @property
    def m(self):
        return self.W.shape[0]

    @property
    def q(self):
        return self.V.shape[1]

    def draw_latent(self, u, rng):
        mean = self.offset + self.V @ np.asarray(u, dtype=float)
        return np.atleast_1d(sample_truncated_normal(mean, 1.0, self.z, rng))

    def draw_effects(self, y, rng):
        h = self.V.T @ (np.asarray(y, dtype=float) - self.offset)
        draw, _, _ = sample_mvn_canonical(h, self.precision, rng)
        return draw

    def draw_scale(self, y, rng, max_attempts=10_000):
        """g with density proportional to g^{m-1} exp(-(g^2 s - 2 g t)/2) on g > 0."""
        y = np.asarray(y, dtype=float)
        s = float(y @ self.V1 @ y)
        t = float(y @ self._v1_offset)
        if not s > 0:
            raise SandwichStepError("y' V1 y must be positive for the scale step")
        m1 = self.m - 1
        mode = (t + math.sqrt(t * t + 4.0 * s * m1)) / (2.0 * s)

        def logf(g):
            return (m1 * math.log(g) if m1 else 0.0) - 0.5 * s * g * g + t * g

        def dlogf(g):
            return m1 / g - s * g + t

        curvature = s + (m1 / (mode * mode) if m1 else 0.0)
        return sample_log_concave(logf, dlogf, mode, 1.0 / math.sqrt(curvature), rng,
                                  max_attempts=max_attempts)

    def group(self):
        """Positive reals acting on y by scaling; chi(g) = g^m."""
        return multiplicative_group(self.m)

    def augmented_model(self):
        return AugmentedModel(self.draw_latent, self.draw_effects, p=self.q, q=self.m, name="probit-glmm")

    def blocked_model(self, k):
        """Latent responses split into ``k`` contiguous observation blocks."""
        from ..adda import BlockedAugmentedModel

        if not 1 <= k <= self.m:
            raise InvalidParameterError("block count must lie in [1, m]")
        rows = np.array_split(np.arange(self.m), k)

        def draw_item(j, i, u, rng):
            idx = int(rows[j][i])
            mean = self.offset[idx] + self.V[idx] @ np.asarray(u, dtype=float)
            return sample_truncated_normal(mean, 1.0, self.z[idx], rng)

        return BlockedAugmentedModel(
            k=k,
            block_items=tuple(r.size for r in rows),
            draw_item=draw_item,
            draw_x_given_y=self.draw_effects,
            x_dim=self.q,
            data_subsets=tuple(tuple(int(i) for i in r) for r in rows),
            waiver="truncated-normal latents are independent across observations given u",
            name="probit-glmm-blocked",
        )


def probit_glmm_da_step(model, u, rng):
    """y_i ~ TN(w_i'beta + v_i'u, 1, z_i), then u' ~ N(M^{-1} V'(y - W beta), M^{-1}), M = V'V + A^{-1}."""
    return model.draw_effects(model.draw_latent(u, rng), rng)


def probit_haar_pxda_step(model, u, rng):
    """DA step with the latent vector rescaled by a draw of g in between."""
    y = model.draw_latent(u, rng)
    g = model.draw_scale(y, rng)
    return model.draw_effects(g * y, rng)
