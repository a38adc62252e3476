"""Stationarity, reversibility and spectra of finite-state kernels.

Operators act on L^2_0(pmf), the mean-zero functions: spectra are computed
after symmetrizing with D^{1/2} K D^{-1/2} (D = diag pmf) and restricting
to the orthogonal complement of sqrt(pmf), which removes the trivial unit
eigenvalue.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from ..errors import OracleCheckError, PreconditionError, ReducibilityError
from .kernels import as_matrix, build_da_kernel, build_sandwich_kernel, group_middle_kernel

__all__ = [
    "SpectrumReport",
    "SingularTriplets",
    "DominanceReport",
    "stationary_distribution",
    "check_detailed_balance",
    "spectrum",
    "svd_triplets",
    "verify_dominance",
    "haar_triviality_check",
    "conditional_projection",
    "UNIT_EIGEN_TOL",
]

UNIT_EIGEN_TOL = 1e-9
REVERSIBLE_TOL = 1e-12
SVD_RELATION_TOL = 1e-10
IDEMPOTENT_TOL = 1e-12
DOMINANCE_TOL = 1e-10
EQUALITY_TOL = 1e-8


def stationary_distribution(kernel):
    """Left unit eigenvector of ``kernel`` normalized to a pmf.

    Raises ReducibilityError when the unit eigenvalue is not simple.
    """
    k = as_matrix(kernel)
    n = k.shape[0]
    eig = linalg.eigvals(k)
    units = int(np.sum(np.abs(eig - 1.0) < UNIT_EIGEN_TOL))
    if units != 1:
        raise ReducibilityError(f"unit eigenvalue has multiplicity {units}; no unique stationary law")
    a = k.T - np.eye(n)
    a[-1] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = linalg.solve(a, b)
    # one step of refinement against the original equations
    resid = pi @ k - pi
    a_fix = k.T - np.eye(n)
    a_fix[-1] = 1.0
    rhs = -resid
    rhs[-1] = 1.0 - pi.sum()
    pi = pi + linalg.solve(a_fix, rhs)
    return pi


def check_detailed_balance(kernel, pmf):
    """max over (x, x') of |k(x'|x) f(x) - k(x|x') f(x')|."""
    flow = np.asarray(pmf)[:, None] * as_matrix(kernel)
    return float(np.max(np.abs(flow - flow.T)))


def _mean_zero_basis(pmf):
    """Orthonormal basis of the complement of sqrt(pmf)."""
    s = np.sqrt(pmf)[:, None]
    q, _ = np.linalg.qr(np.hstack([s, np.eye(s.size)]))
    return q[:, 1 : s.size]


@dataclass
class SingularTriplets:
    """Non-trivial singular triplets of f(x, y) / (f_X f_Y) in L^2(f_X) x L^2(f_Y)."""

    beta: np.ndarray
    g: np.ndarray  # columns g_i on the x-grid
    h: np.ndarray  # columns h_i on the y-grid
    relation_error: float


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    norm: float
    multiplicity: int
    positive: bool
    reversible: bool
    singular_values: np.ndarray
    triplets: Optional[SingularTriplets] = None


def spectrum(kernel, pmf, joint=None):
    """Spectrum of ``kernel`` on L^2_0(pmf).

    For reversible kernels the eigenvalues are real and sorted descending; the
    norm is the largest absolute eigenvalue. Otherwise the eigenvalues are the
    complex spectrum sorted by modulus and the norm is the largest singular value.
    """
    k = as_matrix(kernel)
    pmf = np.asarray(pmf, dtype=float)
    root = np.sqrt(pmf)
    s = root[:, None] * k / root[None, :]
    basis = _mean_zero_basis(pmf)
    s0 = basis.T @ s @ basis
    reversible = check_detailed_balance(k, pmf) <= REVERSIBLE_TOL * max(1.0, k.shape[0])
    sv = np.linalg.svd(s0, compute_uv=False) if s0.size else np.empty(0)
    if reversible:
        eig = np.sort(linalg.eigvalsh(0.5 * (s0 + s0.T)))[::-1] if s0.size else np.empty(0)
        norm = float(np.max(np.abs(eig))) if eig.size else 0.0
        positive = bool(np.all(eig >= -1e-12))
    else:
        eig = linalg.eigvals(s0)
        eig = eig[np.argsort(-np.abs(eig))]
        norm = float(sv[0]) if sv.size else 0.0
        positive = False
    top = eig[0] if eig.size else 0.0
    multiplicity = int(np.sum(np.abs(eig - top) <= UNIT_EIGEN_TOL)) if eig.size else 0
    triplets = svd_triplets(joint) if joint is not None else None
    return SpectrumReport(eig, norm, multiplicity, positive, bool(reversible), sv, triplets)


def svd_triplets(joint, tol=SVD_RELATION_TOL):
    """SVD of f(x, y)/sqrt(f_X(x) f_Y(y)) with the trivial triplet removed.

    g_i = U_i / sqrt(f_X) and h_i = V_i / sqrt(f_Y) are orthonormal in
    L^2(f_X) and L^2(f_Y). Verifies P_Y g_i = beta_i h_i and
    P_X h_i = beta_i g_i, raising OracleCheckError beyond ``tol``.
    """
    fx, fy = joint.f_x, joint.f_y
    m = joint.pmf / np.sqrt(np.outer(fx, fy))
    u, beta, vt = np.linalg.svd(m)
    r = min(m.shape)
    g = u[:, :r] / np.sqrt(fx)[:, None]
    h = vt[:r].T / np.sqrt(fy)[:, None]
    # P_Y g (y) = E[g(X) | Y = y]; P_X h (x) = E[h(Y) | X = x]
    py_g = joint.x_given_y @ g
    px_h = joint.y_given_x @ h
    err = max(np.max(np.abs(py_g - h * beta[:r])), np.max(np.abs(px_h - g * beta[:r])))
    if err > tol:
        raise OracleCheckError(f"singular relations violated by {err:.3e}")
    return SingularTriplets(beta[1:r].copy(), g[:, 1:r], h[:, 1:r], float(err))


def conditional_projection(f_y, vectors):
    """Orthogonal projection in L^2(f_Y) onto span{1, vectors}.

    Returns R[y, y'] = f_Y(y') (1 + sum_i v_i(y) v_i(y')) for L^2(f_Y)
    orthonormal, mean-zero ``vectors``. R is a Markov kernel only when
    all entries are non-negative; callers building middle kernels check this.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float).T).T
    return f_y[None, :] * (1.0 + v @ v.T)


@dataclass
class DominanceReport:
    da_eigenvalues: np.ndarray
    sandwich_eigenvalues: np.ndarray
    beta_squared: np.ndarray
    da_norm: float
    sandwich_norm: float
    pointwise_ok: bool
    norm_ok: bool
    # per index i with beta_i > 0: (i, lambda_SA_i == beta_i^2, R h_i == h_i)
    index_equality: list = field(default_factory=list)
    # per index: (i, beta_i^2 among the eigenvalues of K_SA, R h_i == h_i)
    retained_equality: list = field(default_factory=list)
    note: str = (
        "the norm bound is checked on its conclusion; the hypothesis that the sandwich "
        "chain is itself a DA chain is not checked"
    )

    @property
    def index_criterion_consistent(self):
        return all(eq == fixed for _, eq, fixed in self.index_equality)

    @property
    def retained_criterion_consistent(self):
        return all(eq == fixed for _, eq, fixed in self.retained_equality)

    @property
    def ok(self):
        return self.pointwise_ok and self.norm_ok


def verify_dominance(joint, middle, strict=True):
    """Compare the sandwich operator built from an idempotent, f_Y-reversible
    middle kernel against the DA operator.

    Checks lambda_SA_i <= beta_i^2 pointwise and ||K_SA|| <= ||K||, and for
    each beta_i > 0 records whether lambda_SA_i = beta_i^2 and whether
    R h_i = h_i. With ``strict`` a failed inequality raises OracleCheckError.
    """
    r = np.asarray(middle, dtype=float)
    fy = joint.f_y
    if np.max(np.abs(r @ r - r)) > IDEMPOTENT_TOL:
        raise PreconditionError("middle kernel is not idempotent")
    if check_detailed_balance(r, fy) > IDEMPOTENT_TOL:
        raise PreconditionError("middle kernel is not reversible with respect to f_Y")
    k = build_da_kernel(joint)
    k_sa = build_sandwich_kernel(joint, r)
    spec_k = spectrum(k, joint.f_x)
    spec_sa = spectrum(k_sa, joint.f_x)
    trip = svd_triplets(joint)
    n = spec_k.eigenvalues.size
    beta2 = np.zeros(n)
    beta2[: min(n, trip.beta.size)] = trip.beta[:n] ** 2
    lam = spec_sa.eigenvalues
    pointwise_ok = bool(np.all(lam <= beta2 + DOMINANCE_TOL))
    norm_ok = spec_sa.norm <= spec_k.norm + DOMINANCE_TOL
    index_eq, retained_eq = [], []
    for i, b in enumerate(trip.beta):
        if b <= EQUALITY_TOL or i >= n:
            continue
        hi = trip.h[:, i]
        fixed = bool(np.max(np.abs(r @ hi - hi)) <= EQUALITY_TOL)
        index_eq.append((i + 1, bool(abs(lam[i] - b * b) <= EQUALITY_TOL), fixed))
        retained_eq.append((i + 1, bool(np.min(np.abs(lam - b * b)) <= EQUALITY_TOL), fixed))
    report = DominanceReport(spec_k.eigenvalues, lam, beta2, spec_k.norm, spec_sa.norm,
                             pointwise_ok, bool(norm_ok), index_eq, retained_eq)
    if strict and not report.ok:
        raise OracleCheckError("sandwich operator is not dominated by the DA operator")
    return report


def haar_triviality_check(joint, group, tol=1e-12, drop_tol=1e-10):
    """True iff f(x|y) = f(x|g y) for every grid point y and group element g.

    When true the Haar PX-DA kernel must equal the DA kernel entrywise; when
    false at least one mean-zero eigenvalue must drop by ``drop_tol`` or more.
    Either consequence failing raises OracleCheckError.
    """
    perms = np.stack(group.perms)
    if perms.shape[1] != joint.f_y.size:
        raise PreconditionError("group must act on the y-grid")
    x_given_y = joint.x_given_y
    invariant = bool(np.max(np.abs(x_given_y[perms] - x_given_y[None])) <= tol)
    k = build_da_kernel(joint).matrix
    k_sa = build_sandwich_kernel(joint, group_middle_kernel(joint.f_y, group)).matrix
    if invariant:
        diff = float(np.max(np.abs(k - k_sa)))
        if diff > tol:
            raise OracleCheckError(f"orbit-invariant joint but kernels differ by {diff:.3e}")
    else:
        drop = spectrum(k, joint.f_x).eigenvalues - spectrum(k_sa, joint.f_x).eigenvalues
        if np.max(drop) < drop_tol:
            raise OracleCheckError("non-invariant joint but no eigenvalue improved")
    return invariant
