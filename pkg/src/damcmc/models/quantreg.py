"""Bayesian quantile regression with the normal/exponential mixture for
asymmetric Laplace errors, run as a two-block DA chain.

Blocks: u = beta, v = R (latent rates), y = sigma. Conditionals used:

* sigma | beta, R ~ IG(n0/2 + 3n/2, t0/2 + sum R_i + sum (z_i - w_i'beta - theta R_i)^2 / (2 tau^2 R_i))
* beta | R, sigma ~ N with precision B0^{-1} + sum w_i w_i' / (R_i sigma tau^2)
* R_i | beta, sigma ~ GIG(1/2, theta^2/(sigma tau^2) + 2/sigma, (z_i - w_i'beta)^2 / (sigma tau^2))

State vector: ``(beta_1..beta_p, R_1..R_n, sigma)``.
"""

import math

import numpy as np
from scipy.linalg import cho_solve

from ..core import TwoBlockModel, multiplicative_group, trivial_group
from ..distributions import (
    cholesky_spd,
    sample_generalized_inverse_gaussian,
    sample_inverse_gamma,
    sample_mvn_canonical,
)
from ..errors import InvalidParameterError, SandwichStepError
from ._validation import as_design, as_spd, as_vector, positive

__all__ = [
    "QuantRegModel",
    "quantile_theta",
    "quantile_tau2",
    "quantreg_two_block_step",
    "quantreg_two_block_pxda_step",
]

# guards the GIG b-parameter when a residual is exactly zero
_MIN_RESIDUAL_SQ = 1e-300


def quantile_theta(alpha):
    return (1.0 - 2.0 * alpha) / (alpha * (1.0 - alpha))


def quantile_tau2(alpha):
    return 2.0 / (alpha * (1.0 - alpha))


class QuantRegModel:
    """z_i = w_i' beta + sigma eps_i, eps_i with the alpha-quantile asymmetric Laplace law.

    Priors: beta ~ N(beta0, B0), sigma ~ IG(n0/2, t0/2).
    """

    def __init__(self, w, z, alpha, beta0=None, b0=None, n0=1.0, t0=1.0):
        self.W = as_design(w)
        n, p = self.W.shape
        self.z = as_vector(z, n, "z")
        alpha = float(alpha)
        if not 0 < alpha < 1:
            raise InvalidParameterError("alpha must lie in (0, 1)")
        self.alpha = alpha
        self.theta = quantile_theta(alpha)
        self.tau2 = quantile_tau2(alpha)
        self.beta0 = np.zeros(p) if beta0 is None else as_vector(beta0, p, "beta0")
        self.B0 = as_spd(100.0 * np.eye(p) if b0 is None else b0, p, "B0")
        self.n0 = positive(n0, "n0")
        self.t0 = positive(t0, "t0")
        self.B0_inv = cho_solve((cholesky_spd(self.B0), True), np.eye(p))
        self._prior_h = self.B0_inv @ self.beta0
        self.sigma_shape = self.n0 / 2 + 1.5 * n

    @property
    def n(self):
        return self.W.shape[0]

    @property
    def p(self):
        return self.W.shape[1]

    def split(self, x):
        x = np.asarray(x, dtype=float)
        return x[: self.p], x[self.p : self.p + self.n]

    def join(self, beta, r, sigma):
        return np.concatenate([beta, r, [sigma]])

    def sigma_rate(self, beta, r):
        resid = self.z - self.W @ beta - self.theta * r
        return 0.5 * self.t0 + r.sum() + float(np.sum(resid * resid / r)) / (2.0 * self.tau2)

    def draw_sigma(self, beta, r, rng):
        return float(sample_inverse_gamma(self.sigma_shape, self.sigma_rate(beta, r), rng))

    def draw_beta(self, r, sigma, rng):
        weight = 1.0 / (r * sigma * self.tau2)
        precision = self.B0_inv + (self.W.T * weight) @ self.W
        h = self._prior_h + self.W.T @ (weight * (self.z - self.theta * r))
        draw, _, _ = sample_mvn_canonical(h, precision, rng)
        return draw

    def draw_rates(self, beta, sigma, rng):
        resid2 = np.maximum((self.z - self.W @ beta) ** 2, _MIN_RESIDUAL_SQ)
        a = self.theta ** 2 / (sigma * self.tau2) + 2.0 / sigma
        b = resid2 / (sigma * self.tau2)
        return np.atleast_1d(sample_generalized_inverse_gaussian(0.5, a, b, rng))

    def _min_weighted_rss(self, r):
        """min over beta of sum (z_i - theta R_i - w_i'beta)^2 / R_i."""
        root = 1.0 / np.sqrt(r)
        target = (self.z - self.theta * r) * root
        coef, *_ = np.linalg.lstsq(self.W * root[:, None], target, rcond=None)
        resid = target - (self.W * root[:, None]) @ coef
        return float(resid @ resid)

    def log_acceptance(self, r, sigma, rss_min):
        """log of E_{beta ~ N(beta0, B0)} exp(-sum (z_i - theta R_i - w_i'beta)^2 / (2 R_i sigma tau^2))
        plus rss_min / (2 sigma tau^2).

        The expectation is f_{V,Y}(R, sigma) up to the inverse-gamma factor
        in sigma and is at most exp(-rss_min / (2 sigma tau^2)), so the result
        is <= 0 and serves as the envelope acceptance log-probability.
        """
        weight = 1.0 / (r * sigma * self.tau2)
        target = self.z - self.theta * r
        precision = self.B0_inv + (self.W.T * weight) @ self.W
        chol = cholesky_spd(precision)
        h = self._prior_h + self.W.T @ (weight * target)
        mean = cho_solve((chol, True), h)
        log_det_ratio = 2.0 * np.sum(np.log(np.diag(chol))) + np.linalg.slogdet(self.B0)[1]
        quad = float(h @ mean) - float(self.beta0 @ self._prior_h) - float(np.sum(weight * target * target))
        return min(0.5 * quad - 0.5 * log_det_ratio + rss_min / (2.0 * sigma * self.tau2), 0.0)

    def draw_group(self, variant, x, sigma, rng, max_attempts=100_000):
        """g for the two-block sandwich step; the new scale is g * sigma.

        Variant 2 redraws the scale from its inverse-gamma full conditional.
        Variant 1 proposes from the inverse-gamma envelope with shape
        n0/2 + 3n/2 and rate t0/2 + sum R_i + rss_min / (2 tau^2), then accepts
        with the Gaussian-integral ratio.
        """
        beta, r = self.split(x)
        if variant == 2:
            return self.draw_sigma(beta, r, rng) / sigma
        if variant != 1:
            raise InvalidParameterError("variant must be 1 or 2")
        rss_min = self._min_weighted_rss(r)
        rate = 0.5 * self.t0 + r.sum() + rss_min / (2.0 * self.tau2)
        for _ in range(max_attempts):
            cand = float(sample_inverse_gamma(self.sigma_shape, rate, rng))
            if math.log(rng.random()) < self.log_acceptance(r, cand, rss_min):
                return cand / sigma
        raise SandwichStepError("envelope rejection exceeded its attempt cap")

    def group(self):
        """Positive reals scaling sigma; chi(g) = g with Haar measure dg/g."""
        return multiplicative_group(1)

    def two_block_model(self):
        def draw_y(x, rng):
            beta, r = self.split(x)
            return self.draw_sigma(beta, r, rng)

        def draw_u(r, sigma, rng):
            return self.draw_beta(r, sigma, rng)

        def draw_v(beta, sigma, rng):
            return self.draw_rates(beta, sigma, rng)

        return TwoBlockModel(draw_y, draw_u, draw_v, u_dim=self.p,
                             draw_g=self.draw_group, name="quantile-regression")

    def initial_state(self, sigma=1.0):
        return self.join(np.zeros(self.p), np.full(self.n, sigma), sigma)


def _transition(model, state, rng, group, variant):
    beta, r = model.split(state)
    sigma = model.draw_sigma(beta, r, rng)
    if variant is not None:
        sigma = float(group.act(model.draw_group(variant, state, sigma, rng), sigma))
    beta_new = model.draw_beta(r, sigma, rng)
    r_new = model.draw_rates(beta_new, sigma, rng)
    return model.join(beta_new, r_new, sigma)


def quantreg_two_block_step(model, state, rng):
    """sigma'' | (beta, R), then beta' | (R, sigma''), then R' | (beta', sigma''); records sigma''."""
    return _transition(model, state, rng, None, None)


def quantreg_two_block_pxda_step(model, variant, state, rng, group=None):
    """Two-block sandwich step; ``group=trivial_group()`` reproduces the plain two-block step."""
    group = model.group() if group is None else group
    if group.name == trivial_group().name:
        return _transition(model, state, rng, None, None)
    if variant not in (1, 2):
        raise InvalidParameterError("variant must be 1 or 2")
    return _transition(model, state, rng, group, variant)
