"""Robit (Student-t link) binary regression with normal/gamma augmentation.

Latents per observation: U_i | lambda_i ~ N(w_i' beta, 1/lambda_i) and
lambda_i ~ Gamma(nu/2, rate nu/2), with U_i > 0 exactly when z_i = 1.
Given beta, U_i is a truncated t_nu(w_i' beta, 1) and
lambda_i | U_i ~ Gamma((nu + 1)/2, rate (nu + (U_i - w_i' beta)^2)/2).
"""

import numpy as np

from ..core import AugmentedModel
from ..distributions import sample_mvn_canonical, sample_truncated_t
from ._validation import as_binary, as_design, as_spd, as_vector, positive

__all__ = ["RobitModel", "robit_da_step"]


class RobitModel:
    """P(Z_i = 1 | beta) = F_nu(w_i' beta) with prior N(beta_a, Sigma_a^{-1})."""

    def __init__(self, w, z, nu, beta_a=None, sigma_a=None):
        self.W = as_design(w)
        m, p = self.W.shape
        self.z = as_binary(z, m)
        self.nu = positive(nu, "nu")
        self.beta_a = np.zeros(p) if beta_a is None else as_vector(beta_a, p, "beta_a")
        self.sigma_a = as_spd(np.eye(p) if sigma_a is None else sigma_a, p, "Sigma_a")
        self._prior_h = self.sigma_a @ self.beta_a

    @property
    def m(self):
        return self.W.shape[0]

    @property
    def p(self):
        return self.W.shape[1]

    def draw_latent(self, beta, rng):
        """Returns the stacked vector (U_1..U_m, lambda_1..lambda_m)."""
        loc = self.W @ np.asarray(beta, dtype=float)
        u = np.atleast_1d(sample_truncated_t(loc, self.nu, self.z, rng))
        rate = 0.5 * (self.nu + (u - loc) ** 2)
        lam = rng.standard_gamma(0.5 * (self.nu + 1.0), size=self.m) / rate
        return np.concatenate([u, lam])

    def draw_beta(self, latent, rng):
        latent = np.asarray(latent, dtype=float)
        u, lam = latent[: self.m], latent[self.m :]
        precision = self.sigma_a + (self.W.T * lam) @ self.W
        draw, _, _ = sample_mvn_canonical(self._prior_h + self.W.T @ (lam * u), precision, rng)
        return draw

    def augmented_model(self):
        return AugmentedModel(self.draw_latent, self.draw_beta, p=self.p, q=2 * self.m, name="robit")


def robit_da_step(model, beta, rng):
    return model.draw_beta(model.draw_latent(beta, rng), rng)
