"""Generalized inverse Gaussian GIG(p, a, b), density proportional to
x^{p-1} exp(-(a x + b / x) / 2) on x > 0.

Sampling: ratio-of-uniforms with mode shift on the standardized law
GIG(lam, omega, omega), omega = sqrt(a b), lam = |p|. The bounding
rectangle comes from the two positive roots of the cubic whose roots are
the extrema of (x - mode) sqrt(g(x)). Negative p uses the reciprocal
identity GIG(p, a, b) = 1 / GIG(-p, b, a).
"""

import math

import numpy as np
from scipy.special import kve

from ..errors import ConvergenceError, InvalidParameterError

__all__ = ["sample_generalized_inverse_gaussian", "density_generalized_inverse_gaussian"]

MAX_ROUNDS = 100_000


def _log_g(y, lam, omega):
    return (lam - 1.0) * np.log(y) - 0.5 * omega * (y + 1.0 / y)


def _rou_bounds(lam, omega):
    """Mode and the v-range of the shifted ratio-of-uniforms rectangle (u+ = 1)."""
    mode = (lam - 1.0 + np.sqrt((lam - 1.0) ** 2 + omega ** 2)) / omega
    a = -2.0 * (lam + 1.0) / omega - mode
    b = 2.0 * (lam - 1.0) * mode / omega - 1.0
    c = mode
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    with np.errstate(invalid="ignore"):
        arg = np.clip(-q / 2.0 * np.sqrt(-27.0 / p ** 3), -1.0, 1.0)
        phi = np.arccos(arg)
        r = np.sqrt(-4.0 * p / 3.0)
    x_minus = r * np.cos(phi / 3.0 + 4.0 * math.pi / 3.0) - a / 3.0
    x_plus = r * np.cos(phi / 3.0) - a / 3.0

    bad = ~(np.isfinite(x_minus) & np.isfinite(x_plus) & (x_minus > 0) & (x_minus < mode) & (x_plus > mode))
    for i in np.flatnonzero(bad):
        roots = np.roots([1.0, a[i], b[i], c[i]])
        roots = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
        roots = roots[roots > 0]
        x_minus[i] = roots[roots < mode[i]].max()
        x_plus[i] = roots[roots > mode[i]].min()

    log_gm = _log_g(mode, lam, omega)
    v_minus = (x_minus - mode) * np.exp(0.5 * (_log_g(x_minus, lam, omega) - log_gm))
    v_plus = (x_plus - mode) * np.exp(0.5 * (_log_g(x_plus, lam, omega) - log_gm))
    return mode, v_minus, v_plus, log_gm


def _standard_gig(lam, omega, rng):
    """Draws from GIG(lam, omega, omega), lam >= 0, elementwise over 1-D arrays."""
    mode, v_minus, v_plus, log_gm = _rou_bounds(lam, omega)
    out = np.empty_like(lam)
    pending = np.arange(lam.size)
    batch = 1
    for _ in range(MAX_ROUNDS):
        if not pending.size:
            return out
        n = pending.size * batch
        rep = np.repeat(pending, batch)
        u = rng.random(n)
        v = v_minus[rep] + rng.random(n) * (v_plus[rep] - v_minus[rep])
        with np.errstate(divide="ignore", invalid="ignore"):
            x = v / u + mode[rep]
            ok = (x > 0) & (u > 0)
            logg = np.where(ok, _log_g(np.where(ok, x, 1.0), lam[rep], omega[rep]), -np.inf)
        accept = ok & (2.0 * np.log(np.where(u > 0, u, 1.0)) <= logg - log_gm[rep])
        # first accepted candidate per pending element
        acc = accept.reshape(pending.size, batch)
        hit = acc.any(axis=1)
        first = acc.argmax(axis=1)
        xs = x.reshape(pending.size, batch)
        out[pending[hit]] = xs[hit, first[hit]]
        pending = pending[~hit]
        batch = min(batch * 2, 4096)
    raise ConvergenceError("GIG ratio-of-uniforms sampler exceeded its round cap")


def sample_generalized_inverse_gaussian(p, a, b, rng, size=None):
    """Draw GIG(p, a, b); parameters broadcast. Returns a float for scalar input."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for name, arr in (("p", p), ("a", a), ("b", b)):
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError(f"GIG parameter {name} must be finite")
    if np.any(a <= 0) or np.any(b <= 0):
        raise InvalidParameterError("GIG needs a > 0 and b > 0")
    shape = np.broadcast_shapes(p.shape, a.shape, b.shape) if size is None else tuple(np.atleast_1d(size))
    p_f = np.broadcast_to(p, shape).ravel()
    a_f = np.broadcast_to(a, shape).ravel()
    b_f = np.broadcast_to(b, shape).ravel()

    neg = p_f < 0
    a_eff = np.where(neg, b_f, a_f)
    b_eff = np.where(neg, a_f, b_f)
    lam = np.abs(p_f)
    omega = np.sqrt(a_eff * b_eff)
    y = _standard_gig(lam, omega, rng) * np.sqrt(b_eff / a_eff)
    out = np.where(neg, 1.0 / y, y).reshape(shape)
    return float(out) if out.ndim == 0 else out


def density_generalized_inverse_gaussian(x, p, a, b):
    """Normalized GIG density (a/b)^{p/2} / (2 K_p(sqrt(ab))) x^{p-1} exp(-(ax + b/x)/2)."""
    x = np.asarray(x, dtype=float)
    omega = math.sqrt(a * b)
    log_norm = 0.5 * p * math.log(a / b) - math.log(2.0) - (math.log(kve(p, omega)) - omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = log_norm + (p - 1) * np.log(x) - 0.5 * (a * x + b / x)
    return np.where(x > 0, np.exp(logd), 0.0)
