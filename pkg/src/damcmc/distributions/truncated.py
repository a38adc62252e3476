"""Normal and Student-t laws truncated to a half line at zero.

``side = 1`` keeps the positive half line ``(0, inf)``, ``side = 0`` keeps
``(-inf, 0]``.
"""

import math

import numpy as np
from scipy.special import ndtr, ndtri, stdtr, stdtrit

from ..errors import InvalidParameterError

__all__ = [
    "sample_truncated_normal",
    "density_truncated_normal",
    "sample_truncated_t",
    "TAIL_SWITCH",
]

# beyond this many standard deviations into the tail, inverse-CDF sampling
# is replaced by exponential-envelope rejection
TAIL_SWITCH = 5.0


def _open_unit(rng, n):
    u = rng.random(n)
    return np.where(u == 0.0, 2.0 ** -60, u)


def _std_normal_above(a, rng):
    """Z ~ N(0, 1) conditioned on Z > a, elementwise over the 1-D array ``a``."""
    z = np.empty_like(a)
    near = a <= TAIL_SWITCH
    if near.any():
        an = a[near]
        z[near] = -ndtri(_open_unit(rng, an.size) * ndtr(-an))
    idx = np.flatnonzero(~near)
    while idx.size:
        ai = a[idx]
        lam = 0.5 * (ai + np.sqrt(ai * ai + 4.0))
        cand = ai + rng.standard_exponential(idx.size) / lam
        accept = rng.random(idx.size) <= np.exp(-0.5 * (cand - lam) ** 2)
        z[idx[accept]] = cand[accept]
        idx = idx[~accept]
    return z


def _validate_side(side):
    side = np.asarray(side)
    if not np.all((side == 0) | (side == 1)):
        raise InvalidParameterError("side must be 0 or 1")
    return side.astype(bool)


def sample_truncated_normal(mu, sigma2, side, rng):
    """TN(mu, sigma2, side): positive draws when side = 1, non-positive when side = 0."""
    mu = np.asarray(mu, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(~np.isfinite(mu)) or np.any(~np.isfinite(sigma2)) or np.any(sigma2 <= 0):
        raise InvalidParameterError("need finite mu and finite sigma2 > 0")
    pos = _validate_side(side)
    shape = np.broadcast_shapes(mu.shape, sigma2.shape, pos.shape)
    mu_f = np.broadcast_to(mu, shape).ravel()
    sd_f = np.sqrt(np.broadcast_to(sigma2, shape).ravel())
    pos_f = np.broadcast_to(pos, shape).ravel()
    lower = np.where(pos_f, -mu_f / sd_f, mu_f / sd_f)
    z = _std_normal_above(lower, rng)
    out = np.where(pos_f, mu_f + sd_f * z, mu_f - sd_f * z)
    # guard the measure-zero rounding case at the boundary
    out = np.where(pos_f, np.maximum(out, np.nextafter(0.0, 1.0)), np.minimum(out, 0.0))
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def density_truncated_normal(x, mu, sigma2, side):
    x = np.asarray(x, dtype=float)
    sd = math.sqrt(sigma2)
    mass = ndtr(mu / sd) if side == 1 else ndtr(-mu / sd)
    phi = np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    support = x > 0 if side == 1 else x <= 0
    return np.where(support, phi / mass, 0.0)


def sample_truncated_t(loc, df, side, rng):
    """Student-t with ``df`` degrees of freedom, location ``loc``, unit scale,
    truncated to the half line picked by ``side``."""
    loc = np.asarray(loc, dtype=float)
    if df <= 0 or not math.isfinite(df):
        raise InvalidParameterError("df must be finite and > 0")
    pos = _validate_side(side)
    shape = np.broadcast_shapes(loc.shape, pos.shape)
    loc_f = np.broadcast_to(loc, shape).ravel()
    pos_f = np.broadcast_to(pos, shape).ravel()
    # draw S < c from the lower tail, then map back so only small CDF values are inverted
    c = np.where(pos_f, loc_f, -loc_f)
    s = stdtrit(df, _open_unit(rng, loc_f.size) * stdtr(df, c))
    out = np.where(pos_f, loc_f - s, loc_f + s)
    out = np.where(pos_f, np.maximum(out, np.nextafter(0.0, 1.0)), np.minimum(out, 0.0))
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out
