"""Nyström discretization of the DA operator for a standard bivariate normal joint.

With X, Y standard normal and corr(X, Y) = rho, the DA chain on x is the
autoregression x' = rho^2 x + sqrt(1 - rho^4) e, whose operator has
eigenvalues rho^(2i), i = 0, 1, 2, ...
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from ..errors import InvalidParameterError

__all__ = ["GaussianToy", "CompactnessReport", "compactness_diagnostics", "nystrom_spectrum"]


@dataclass(frozen=True)
class GaussianToy:
    rho: float
    half_width: float = 8.0
    points: int = 400

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise InvalidParameterError("need |rho| < 1")
        if self.points < 3:
            raise InvalidParameterError("need at least 3 grid points")

    @property
    def phi(self):
        return self.rho ** 2

    def kernel_density(self, x, x_new):
        """k(x'|x) = N(x'; phi x, 1 - phi^2)."""
        phi = self.phi
        return norm.pdf(x_new, loc=phi * x, scale=math.sqrt(1.0 - phi * phi))

    def stationary_density(self, x):
        return norm.pdf(x)

    def grid(self, points=None):
        n = self.points if points is None else points
        return np.linspace(-self.half_width, self.half_width, n)


def _operator_matrix(toy, points):
    """Symmetric Nyström matrix sqrt(w_i) a(x_i, x_j) sqrt(w_j), with
    a(x, x') = k(x'|x)/f(x') and stationary weights w_i = f(x_i) dx."""
    x = toy.grid(points)
    dx = x[1] - x[0]
    kd = toy.kernel_density(x[:, None], x[None, :])
    w = toy.stationary_density(x) * dx
    a = kd / toy.stationary_density(x)[None, :]
    root = np.sqrt(w)
    m = root[:, None] * a * root[None, :]
    return 0.5 * (m + m.T), x, dx, kd


def nystrom_spectrum(toy, points=None):
    """Eigenvalues of the discretized operator, descending, trivial eigenvalue included."""
    m, *_ = _operator_matrix(toy, toy.points if points is None else points)
    return np.sort(np.linalg.eigvalsh(m))[::-1]


@dataclass
class CompactnessReport:
    points: list
    trace: list
    hilbert_schmidt: list
    trace_order: float
    hs_order: float
    trace_converged: bool
    hs_converged: bool
    eigenvalues: np.ndarray
    status: str = field(default="")

    @property
    def trace_mean_zero(self):
        return self.trace[-1] - 1.0

    @property
    def hs_mean_zero(self):
        return self.hilbert_schmidt[-1] - 1.0


def _observed_order(values):
    d1 = abs(values[1] - values[0])
    d2 = abs(values[2] - values[1])
    if d1 < 1e-13 or d2 < 1e-13:
        return math.inf  # differences already at roundoff
    return math.log2(d1 / d2)


def _converged(values, tol):
    d1 = abs(values[1] - values[0])
    d2 = abs(values[2] - values[1])
    return d2 <= max(d1, 1e-13) and d2 <= tol * max(1.0, abs(values[2]))


def compactness_diagnostics(toy, refinements=(100, 200, 400), tol=1e-3):
    """Quadrature of the trace integral of k(x, x) and the Hilbert-Schmidt
    double integral of a(x, x')^2 f(x) f(x') on successively refined grids.

    A sequence that keeps growing under refinement is reported as not trace
    class (or not Hilbert-Schmidt) at this resolution rather than raised.
    """
    if len(refinements) != 3:
        raise InvalidParameterError("need exactly three refinements")
    traces, hs = [], []
    for n in refinements:
        m, x, dx, kd = _operator_matrix(toy, n)
        traces.append(float(np.sum(np.diag(kd)) * dx))
        hs.append(float(np.sum(m * m)))
    eig = nystrom_spectrum(toy, refinements[-1])
    tc, hc = _converged(traces, tol), _converged(hs, tol)
    parts = []
    parts.append("trace class" if tc else "not trace class at this resolution")
    parts.append("Hilbert-Schmidt" if hc else "not Hilbert-Schmidt at this resolution")
    return CompactnessReport(list(refinements), traces, hs, _observed_order(traces), _observed_order(hs),
                             tc, hc, eig, "; ".join(parts))
