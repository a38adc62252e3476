"""Binomial logistic regression with Polya-Gamma augmentation."""

import numpy as np

from ..core import AugmentedModel
from ..distributions import sample_mvn_canonical, sample_polya_gamma
from ..errors import InvalidParameterError, NotSPDError
from ._validation import as_design, as_psd, as_vector

__all__ = ["LogisticModel", "pg_logistic_da_step"]


class LogisticModel:
    """z_i ~ Binomial(l_i, logistic(w_i' beta)) with prior N(mu0, Q^{-1}).

    ``Q = 0`` (flat prior) requires ``assume_proper=True``: the caller vouches
    that the posterior is proper for the data at hand.
    """

    def __init__(self, w, z, trials=None, mu0=None, prior_precision=None, assume_proper=False):
        self.W = as_design(w)
        m, p = self.W.shape
        self.z = as_vector(z, m, "z")
        self.trials = np.ones(m) if trials is None else as_vector(trials, m, "trials")
        if np.any(self.trials < 1) or np.any(self.trials != np.round(self.trials)):
            raise InvalidParameterError("trial counts must be integers >= 1")
        if np.any(self.z < 0) or np.any(self.z > self.trials) or np.any(self.z != np.round(self.z)):
            raise InvalidParameterError("success counts must be integers in [0, trials]")
        self.mu0 = np.zeros(p) if mu0 is None else as_vector(mu0, p, "mu0")
        q = np.eye(p) if prior_precision is None else prior_precision
        self.Q = as_psd(q, p, "prior precision")
        self.assume_proper = bool(assume_proper)
        if not np.any(self.Q) and not self.assume_proper:
            raise InvalidParameterError("a flat prior (Q = 0) needs assume_proper=True")
        self.kappa = self.z - self.trials / 2.0
        self._h = self.W.T @ self.kappa + self.Q @ self.mu0

    @property
    def p(self):
        return self.W.shape[1]

    def draw_latent(self, beta, rng):
        return sample_polya_gamma(self.trials, np.abs(self.W @ np.asarray(beta, dtype=float)), rng)

    def draw_beta(self, omega, rng):
        precision = (self.W.T * np.asarray(omega, dtype=float)) @ self.W + self.Q
        try:
            draw, _, _ = sample_mvn_canonical(self._h, precision, rng)
        except NotSPDError as exc:
            hint = " (flat prior: the asserted posterior propriety does not hold here)" if self.assume_proper else ""
            raise NotSPDError(f"W' Omega W + Q is not positive definite{hint}") from exc
        return draw

    def augmented_model(self):
        return AugmentedModel(self.draw_latent, self.draw_beta, p=self.p, q=self.W.shape[0],
                              name="logistic-pg")


def pg_logistic_da_step(model, beta, rng):
    """omega_i ~ PG(l_i, |w_i' beta|), then beta' ~ N((W'OW + Q)^{-1}(W'kappa + Q mu0), (W'OW + Q)^{-1})."""
    return model.draw_beta(model.draw_latent(beta, rng), rng)
