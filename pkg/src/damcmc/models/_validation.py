"""Shared input checks for model constructors."""

import numpy as np

from ..errors import InvalidParameterError, NotSPDError
from ..distributions import cholesky_spd


def as_design(w, name="W"):
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2 or w.size == 0:
        raise InvalidParameterError(f"{name} must be a non-empty 2-D array")
    if not np.all(np.isfinite(w)):
        raise InvalidParameterError(f"{name} must be finite")
    return w


def as_vector(v, length, name):
    v = np.asarray(v, dtype=float).ravel()
    if v.size != length:
        raise InvalidParameterError(f"{name} must have length {length}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError(f"{name} must be finite")
    return v


def as_binary(z, length):
    z = as_vector(z, length, "z")
    if not np.all((z == 0) | (z == 1)):
        raise InvalidParameterError("binary responses must be 0 or 1")
    return z.astype(int)


def as_spd(a, size, name):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape != (size, size):
        raise InvalidParameterError(f"{name} must be {size} by {size}")
    try:
        cholesky_spd(a)
    except NotSPDError as exc:
        raise InvalidParameterError(f"{name} must be symmetric positive definite") from exc
    return a


def as_psd(a, size, name, tol=1e-10):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape != (size, size):
        raise InvalidParameterError(f"{name} must be {size} by {size}")
    if not np.allclose(a, a.T, rtol=0, atol=tol * max(1.0, np.abs(a).max())):
        raise InvalidParameterError(f"{name} must be symmetric")
    if a.size and np.linalg.eigvalsh(a).min() < -tol * max(1.0, np.abs(a).max()):
        raise InvalidParameterError(f"{name} must be positive semidefinite")
    return a


def positive(value, name, allow_zero=False):
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise InvalidParameterError(f"{name} must be finite and {bound}")
    return value
