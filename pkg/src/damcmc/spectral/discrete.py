"""Finite-state joints and permutation groups.

Each joint exposes vectorized conditional samplers (states are integer
indices, arrays of them are sampled elementwise) so the live kernels in
:mod:`damcmc.core` and :mod:`damcmc.adda` can be run over many start
states at once and compared with the exact matrices.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..core import AugmentedModel, GroupAction, TwoBlockModel
from ..errors import InvalidParameterError

__all__ = [
    "DiscreteJoint",
    "TwoBlockDiscreteJoint",
    "BlockedDiscreteJoint",
    "PermutationGroup",
    "sample_rows",
]

MASS_TOL = 1e-14


def sample_rows(cum, rows, rng):
    """Draw one column index per entry of ``rows`` from the row-wise CDFs ``cum``."""
    rows = np.asarray(rows, dtype=np.intp)
    u = rng.random(rows.shape)
    c = cum[rows]
    idx = (u[..., None] >= c[..., :-1]).sum(axis=-1)
    return idx


def _row_cdf(cond):
    cum = np.cumsum(cond, axis=1)
    cum[:, -1] = 1.0
    return cum


def _validate_pmf(pmf):
    pmf = np.asarray(pmf, dtype=float)
    if np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
        raise InvalidParameterError("joint pmf entries must be finite and non-negative")
    if abs(pmf.sum() - 1.0) > MASS_TOL * max(1, pmf.size):
        raise InvalidParameterError(f"joint pmf must sum to 1, got {pmf.sum()!r}")
    return pmf


class DiscreteJoint:
    """Joint pmf f(x, y) on an S_x by S_y grid."""

    def __init__(self, pmf, x_grid=None, y_grid=None, strictly_positive=False):
        self.pmf = _validate_pmf(pmf)
        if self.pmf.ndim != 2:
            raise InvalidParameterError("pmf must be a matrix")
        if strictly_positive and np.any(self.pmf <= 0):
            raise InvalidParameterError("pmf must be strictly positive")
        sx, sy = self.pmf.shape
        self.x_grid = np.arange(sx) if x_grid is None else np.asarray(x_grid)
        self.y_grid = np.arange(sy) if y_grid is None else np.asarray(y_grid)
        self.f_x = self.pmf.sum(axis=1)
        self.f_y = self.pmf.sum(axis=0)
        if np.any(self.f_x <= 0) or np.any(self.f_y <= 0):
            raise InvalidParameterError("every grid point needs positive marginal mass")
        # row x of y_given_x is f(.|x); row y of x_given_y is f(.|y)
        self.y_given_x = self.pmf / self.f_x[:, None]
        self.x_given_y = (self.pmf / self.f_y[None, :]).T
        self._cum_y = _row_cdf(self.y_given_x)
        self._cum_x = _row_cdf(self.x_given_y)

    @property
    def shape(self):
        return self.pmf.shape

    @classmethod
    def random(cls, rng, sx, sy, concentration=1.0, strictly_positive=True):
        pmf = rng.dirichlet(np.full(sx * sy, concentration)).reshape(sx, sy)
        if strictly_positive:
            pmf = np.maximum(pmf, 1e-6)
            pmf /= pmf.sum()
        return cls(pmf, strictly_positive=strictly_positive)

    @classmethod
    def independent(cls, f_x, f_y):
        return cls(np.outer(f_x, f_y))

    def draw_y_given_x(self, x, rng):
        return sample_rows(self._cum_y, x, rng)

    def draw_x_given_y(self, y, rng):
        return sample_rows(self._cum_x, y, rng)

    def augmented_model(self):
        return AugmentedModel(
            draw_y_given_x=self.draw_y_given_x,
            draw_x_given_y=self.draw_x_given_y,
            log_joint=lambda x, y: np.log(self.pmf[x, y]),
            p=1,
            q=1,
            name=f"discrete-joint-{self.pmf.shape[0]}x{self.pmf.shape[1]}",
        )


class TwoBlockDiscreteJoint:
    """Joint pmf f(u, v, y) with x = (u, v); x is flattened as u * S_v + v."""

    def __init__(self, pmf):
        self.pmf = _validate_pmf(pmf)
        if self.pmf.ndim != 3:
            raise InvalidParameterError("pmf must have axes (u, v, y)")
        su, sv, sy = self.pmf.shape
        self.f_uv = self.pmf.sum(axis=2)
        self.f_x = self.f_uv.ravel()
        self.f_vy = self.pmf.sum(axis=0)
        self.f_uy = self.pmf.sum(axis=1)
        self.f_y = self.pmf.sum(axis=(0, 1))
        if np.any(self.f_x <= 0) or np.any(self.f_y <= 0):
            raise InvalidParameterError("every grid point needs positive marginal mass")
        # f(y | u, v): rows indexed by flattened x
        self.y_given_x = (self.pmf / self.f_uv[:, :, None]).reshape(su * sv, sy)
        # f(u | v, y): rows indexed by v * S_y + y
        self.u_given_vy = (self.pmf / self.f_vy[None]).transpose(1, 2, 0).reshape(sv * sy, su)
        # f(v | u, y): rows indexed by u * S_y + y
        self.v_given_uy = (self.pmf / self.f_uy[:, None, :]).transpose(0, 2, 1).reshape(su * sy, sv)
        self._cum_y = _row_cdf(self.y_given_x)
        self._cum_u = _row_cdf(self.u_given_vy)
        self._cum_v = _row_cdf(self.v_given_uy)

    @property
    def shape(self):
        return self.pmf.shape

    @classmethod
    def random(cls, rng, su, sv, sy, concentration=1.0):
        pmf = rng.dirichlet(np.full(su * sv * sy, concentration)).reshape(su, sv, sy)
        pmf = np.maximum(pmf, 1e-6)
        return cls(pmf / pmf.sum())

    def flat(self, u, v):
        return np.asarray(u) * self.shape[1] + np.asarray(v)

    def _x_index(self, x):
        x = np.asarray(x)
        return self.flat(x[..., 0].astype(np.intp), x[..., 1].astype(np.intp))

    def model(self, draw_g=None):
        sy = self.shape[2]

        def draw_y(x, rng):
            return sample_rows(self._cum_y, self._x_index(x), rng)

        def draw_u(v, y, rng):
            v = np.asarray(v)[..., 0].astype(np.intp)
            return sample_rows(self._cum_u, v * sy + y, rng)[..., None]

        def draw_v(u, y, rng):
            u = np.asarray(u)[..., 0].astype(np.intp)
            return sample_rows(self._cum_v, u * sy + y, rng)[..., None]

        return TwoBlockModel(draw_y, draw_u, draw_v, u_dim=1, draw_g=draw_g, name="discrete-two-block")

    def group_sampler(self, group):
        """Exact g-draws for two-block Haar PX-DA over a permutation group.

        Variant 1 weights g by f_{V,Y}(v, g y), variant 2 by f(u, v, g y).
        """
        perms = np.stack(group.perms)

        def draw_g(variant, x, y, rng):
            x = np.asarray(x)
            u = x[..., 0].astype(np.intp)
            v = x[..., 1].astype(np.intp)
            gy = perms[:, np.asarray(y, dtype=np.intp)]  # (order, ...)
            w = self.f_vy[v, gy] if variant == 1 else self.pmf[u, v, gy]
            w = np.moveaxis(w, 0, -1)
            cum = np.cumsum(w, axis=-1)
            r = rng.random(cum.shape[:-1]) * cum[..., -1]
            return (r[..., None] >= cum[..., :-1]).sum(axis=-1)

        return draw_g


class BlockedDiscreteJoint:
    """Joint of x and k conditionally independent blocks:
    f(x, y^1, ..., y^k) = f_X(x) prod_j f_j(y^j | x).

    ``conditionals[j]`` is the S_x by S_j matrix of f_j(. | x).
    """

    def __init__(self, f_x, conditionals):
        self.f_x = _validate_pmf(f_x)
        self.conditionals = [np.asarray(c, dtype=float) for c in conditionals]
        for c in self.conditionals:
            if c.shape[0] != self.f_x.size or np.any(c < 0) or not np.allclose(c.sum(axis=1), 1.0, atol=1e-14):
                raise InvalidParameterError("each block conditional must be a row-stochastic S_x by S_j matrix")
        self.k = len(self.conditionals)
        self.block_sizes = tuple(c.shape[1] for c in self.conditionals)
        self._cum = [_row_cdf(c) for c in self.conditionals]
        pmf_y_given_x = self.y_given_x_tensor()
        self.pmf = self.f_x.reshape((-1,) + (1,) * self.k) * pmf_y_given_x
        self.y_states = list(itertools.product(*(range(s) for s in self.block_sizes)))
        self.f_y = self.pmf.sum(axis=0)
        if np.any(self.f_y <= 0):
            raise InvalidParameterError("every block configuration needs positive mass")
        flat_pmf = self.pmf.reshape(self.f_x.size, -1)
        self.x_given_y = (flat_pmf / flat_pmf.sum(axis=0)).T
        self._cum_x = _row_cdf(self.x_given_y)

    @classmethod
    def random(cls, rng, sx, block_sizes, concentration=1.0):
        f_x = rng.dirichlet(np.full(sx, concentration))
        f_x = np.maximum(f_x, 1e-3)
        conds = []
        for s in block_sizes:
            c = np.maximum(rng.dirichlet(np.full(s, concentration), size=sx), 1e-3)
            conds.append(c / c.sum(axis=1, keepdims=True))
        return cls(f_x / f_x.sum(), conds)

    @classmethod
    def from_pmf(cls, pmf, tol=1e-12):
        """Factor a full pmf tensor, raising unless the blocks are conditionally independent given x."""
        pmf = _validate_pmf(pmf)
        f_x = pmf.sum(axis=tuple(range(1, pmf.ndim)))
        k = pmf.ndim - 1
        conds = []
        for j in range(k):
            axes = tuple(a for a in range(1, pmf.ndim) if a != j + 1)
            conds.append(pmf.sum(axis=axes) / f_x[:, None])
        joint = cls(f_x, conds)
        if np.max(np.abs(joint.pmf - pmf)) > tol:
            raise InvalidParameterError("blocks are not conditionally independent given x")
        return joint

    def y_given_x_tensor(self):
        out = np.ones((self.f_x.size,) + self.block_sizes)
        for j, c in enumerate(self.conditionals):
            shape = [self.f_x.size] + [1] * self.k
            shape[j + 1] = c.shape[1]
            out = out * c.reshape(shape)
        return out

    def conditional_independence_gap(self):
        """Largest deviation of f(y | x) from the product of its block marginals."""
        t = self.pmf / self.f_x.reshape((-1,) + (1,) * self.k)
        prod = np.ones_like(t)
        for j in range(self.k):
            axes = tuple(a for a in range(1, self.k + 1) if a != j + 1)
            marg = t.sum(axis=axes, keepdims=True)
            prod = prod * marg
        return float(np.max(np.abs(t - prod)))

    def y_index(self, blocks):
        """Flatten block values (last axis) into an index into the product grid."""
        blocks = np.asarray(blocks, dtype=np.intp)
        return np.ravel_multi_index(tuple(np.moveaxis(blocks, -1, 0)), self.block_sizes)

    def draw_block(self, j, x, rng):
        return sample_rows(self._cum[j], x, rng)

    def draw_x_given_blocks(self, blocks, rng):
        return sample_rows(self._cum_x, self.y_index(blocks), rng)


@dataclass
class PermutationGroup:
    """Finite group acting on a grid by permutations; Haar measure is counting measure and chi = 1."""

    perms: list
    _table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        perms = [np.asarray(p, dtype=np.intp) for p in self.perms]
        n = perms[0].size
        for p in perms:
            if p.shape != (n,) or not np.array_equal(np.sort(p), np.arange(n)):
                raise InvalidParameterError("group elements must be permutations of the grid")
        keys = {p.tobytes(): i for i, p in enumerate(perms)}
        if len(keys) != len(perms):
            raise InvalidParameterError("duplicate group elements")
        if np.arange(n).tobytes() not in keys:
            raise InvalidParameterError("group must contain the identity")
        table = np.empty((len(perms), len(perms)), dtype=np.intp)
        for i, a in enumerate(perms):
            for j, b in enumerate(perms):
                composed = a[b]  # (a b)(y) = a(b(y))
                key = composed.tobytes()
                if key not in keys:
                    raise InvalidParameterError("permutations are not closed under composition")
                table[i, j] = keys[key]
        self.perms = perms
        self._table = table
        self.identity_index = keys[np.arange(n).tobytes()]
        self._inverse = np.array([int(np.flatnonzero(table[i] == self.identity_index)[0]) for i in range(len(perms))])

    @property
    def order(self):
        return len(self.perms)

    @property
    def size(self):
        return self.perms[0].size

    @classmethod
    def trivial(cls, n):
        return cls([np.arange(n)])

    @classmethod
    def reflection(cls, n):
        """The two-element group reversing the grid, e.g. y -> -y on a symmetric grid."""
        return cls([np.arange(n), np.arange(n)[::-1]])

    def orbits(self):
        seen = np.full(self.size, -1)
        label = 0
        for y in range(self.size):
            if seen[y] < 0:
                seen[[p[y] for p in self.perms]] = label
                label += 1
        return seen

    def action(self):
        perms = np.stack(self.perms)
        return GroupAction(
            identity=self.identity_index,
            compose=lambda g1, g2: int(self._table[g1, g2]),
            invert=lambda g: int(self._inverse[g]),
            act=lambda g, y: perms[g, y],
            multiplier=lambda g: 1.0,
            log_haar=lambda g: 0.0,
            name=f"permutation-group-{self.order}",
        )

    def orbit_weights(self, f_y, y):
        """Normalized weights over group elements proportional to f_Y(g y), one row per entry of y."""
        perms = np.stack(self.perms)
        w = f_y[perms[:, np.asarray(y)]].T
        return w / w.sum(axis=-1, keepdims=True)

    def sampler(self, f_y):
        """Exact draw of g with probability proportional to f_Y(t_g y) (chi = 1, counting Haar)."""
        perms = np.stack(self.perms)

        def draw_g(y, rng):
            y = np.asarray(y, dtype=np.intp)
            w = f_y[perms[:, y]]
            w = np.moveaxis(w, 0, -1)
            cum = np.cumsum(w, axis=-1)
            u = rng.random(y.shape) * cum[..., -1]
            return (u[..., None] >= cum[..., :-1]).sum(axis=-1)

        return draw_g
