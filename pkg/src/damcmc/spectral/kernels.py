"""Exact transition matrices mirroring every live kernel."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameterError, InvarianceError

__all__ = [
    "TransitionMatrix",
    "build_da_kernel",
    "build_sandwich_kernel",
    "group_middle_kernel",
    "build_haar_pxda_kernel",
    "build_two_block_kernel",
    "build_two_block_pxda_kernel",
    "build_da_joint_kernel",
    "adda_exact_kernel_discrete",
    "ROW_TOL",
    "INVARIANCE_TOL",
]

ROW_TOL = 1e-12
INVARIANCE_TOL = 1e-12


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix; ``matrix[i, j]`` is the probability of moving from state i to j."""

    matrix: np.ndarray
    states: tuple = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParameterError("transition matrix must be square")
        if np.any(m < -ROW_TOL) or np.max(np.abs(m.sum(axis=1) - 1.0)) > ROW_TOL:
            raise InvalidParameterError("transition matrix rows must be probability vectors")
        object.__setattr__(self, "matrix", m)
        if self.states is None:
            object.__setattr__(self, "states", tuple(range(m.shape[0])))

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def size(self):
        return self.matrix.shape[0]


def as_matrix(kernel):
    return kernel.matrix if isinstance(kernel, TransitionMatrix) else np.asarray(kernel, dtype=float)


def build_da_kernel(joint):
    """K[x, x'] = sum_y f(x'|y) f(y|x)."""
    return TransitionMatrix(joint.y_given_x @ joint.x_given_y)


def build_sandwich_kernel(joint, middle, tol=INVARIANCE_TOL):
    """K_SA[x, x'] = sum_{y, y'} f(y|x) r(y'|y) f(x'|y'); the middle kernel must leave f_Y invariant."""
    r = np.asarray(middle, dtype=float)
    sy = joint.f_y.size
    if r.shape != (sy, sy):
        raise InvalidParameterError(f"middle kernel must be {sy} by {sy}")
    if np.any(r < -ROW_TOL) or np.max(np.abs(r.sum(axis=1) - 1.0)) > ROW_TOL:
        raise InvalidParameterError("middle kernel rows must be probability vectors")
    gap = np.max(np.abs(joint.f_y @ r - joint.f_y))
    if gap > tol:
        raise InvarianceError(f"middle kernel does not leave f_Y invariant (gap {gap:.3e})")
    return TransitionMatrix(joint.y_given_x @ r @ joint.x_given_y)


def group_middle_kernel(f_y, group):
    """Haar PX-DA middle step for a permutation group: y' = g y with P(g) proportional to f_Y(g y)."""
    perms = np.stack(group.perms)
    sy = f_y.size
    r = np.zeros((sy, sy))
    w = f_y[perms]  # w[g, y] = f_Y(g y)
    w = w / w.sum(axis=0, keepdims=True)
    for g in range(perms.shape[0]):
        np.add.at(r, (np.arange(sy), perms[g]), w[g])
    return r


def build_haar_pxda_kernel(joint, group):
    return build_sandwich_kernel(joint, group_middle_kernel(joint.f_y, group))


def _two_block_compose(tb, y_dist):
    """Shared tail of the two-block kernels. ``y_dist[x, v, y]`` is the law of the
    augmentation fed to the u- and v-updates from state x (whose v-coordinate is v)."""
    su, sv, sy = tb.shape
    u_given_vy = tb.u_given_vy.reshape(sv, sy, su)
    v_given_uy = tb.v_given_uy.reshape(su, sy, sv)
    nx = su * sv
    k = np.zeros((nx, su, sv))
    v_of_x = np.arange(nx) % sv
    for x in range(nx):
        # P(u' | x) via y, then v' | u', y
        py = y_dist[x]  # over y
        joint_uy = py[:, None] * u_given_vy[v_of_x[x]]  # (y, u')
        k[x] = np.einsum("yu,uyv->uv", joint_uy, v_given_uy)
    return TransitionMatrix(k.reshape(nx, nx))


def build_two_block_kernel(tb):
    """k_TB[(u,v), (u',v')] = sum_y f(y|u,v) f(u'|v,y) f(v'|u',y)."""
    return _two_block_compose(tb, tb.y_given_x)


def build_two_block_pxda_kernel(tb, group, variant):
    """Two-block Haar PX-DA over a permutation group on the y-grid.

    Variant 1 weights g by f_{V,Y}(v, g y); variant 2 by f_{U,V,Y}(u, v, g y).
    """
    if variant not in (1, 2):
        raise InvalidParameterError("variant must be 1 or 2")
    su, sv, sy = tb.shape
    perms = np.stack(group.perms)
    nx = su * sv
    out = np.zeros((nx, sy))
    for x in range(nx):
        u, v = divmod(x, sv)
        weight = tb.f_vy[v] if variant == 1 else tb.pmf[u, v]
        py = tb.y_given_x[x]
        for y in range(sy):
            w = weight[perms[:, y]]
            w = w / w.sum()
            np.add.at(out[x], perms[:, y], py[y] * w)
    return _two_block_compose(tb, out)


def build_da_joint_kernel(blocked):
    """DA kernel lifted to the joint state (x, y): y' ~ f(y'|x), then x' ~ f(x'|y')."""
    sx = blocked.f_x.size
    ny = int(np.prod(blocked.block_sizes))
    y_given_x = blocked.y_given_x_tensor().reshape(sx, ny)
    # K[(x, y), (x', y')] = f(y'|x) f(x'|y'); independent of y
    block = y_given_x[:, None, :] * blocked.x_given_y.T[None, :, :]  # (x, x', y')
    k = np.repeat(block[:, None, :, :], ny, axis=1)
    return TransitionMatrix(k.reshape(sx * ny, sx * ny))


def _normalize_selection(selection, k, sx):
    """Map the selection argument to {subset (tuple of blocks): probability array over x}."""
    if k == 2 and not isinstance(selection, dict):
        c1 = np.broadcast_to(np.asarray(selection, dtype=float), (sx,))
        selection = {(0,): c1, (1,): 1.0 - c1}
    out = {}
    for subset, prob in selection.items():
        subset = tuple(sorted(subset))
        if not subset or any(j < 0 or j >= k for j in subset):
            raise InvalidParameterError(f"invalid block subset {subset}")
        out[subset] = np.broadcast_to(np.asarray(prob, dtype=float), (sx,))
    total = sum(out.values())
    if any(np.any(p < 0) or np.any(p > 1) for p in out.values()) or np.max(np.abs(total - 1.0)) > 1e-12:
        raise InvalidParameterError("selection probabilities must form a probability vector for every x")
    return out


def adda_exact_kernel_discrete(blocked, selection, epsilon):
    """Exact ADDA transition matrix on the joint state (x, y^1, ..., y^k).

    With probability ``epsilon`` every block is refreshed from f(y^j | x);
    otherwise the subset S is refreshed with probability ``selection[S](x)``
    and the remaining blocks are kept. Then x' ~ f(x' | y'). For k = 2,
    ``selection`` may be the array c_1(x), with c_2 = 1 - c_1 and S = {1} or {2}.
    """
    if not 0 <= epsilon <= 1:
        raise InvalidParameterError("epsilon must lie in [0, 1]")
    k = blocked.k
    sx = blocked.f_x.size
    sizes = blocked.block_sizes
    ny = int(np.prod(sizes))
    sel = _normalize_selection(selection, k, sx)
    sel_all = tuple(range(k))
    mix = {s: (1.0 - epsilon) * p for s, p in sel.items()}
    mix[sel_all] = mix.get(sel_all, np.zeros(sx)) + epsilon

    y_states = np.array(blocked.y_states, dtype=np.intp).reshape(ny, k)
    x_given_y = blocked.x_given_y  # (ny, sx)
    k_mat = np.zeros((sx, ny, sx, ny))
    for subset, weight in mix.items():
        if not np.any(weight):
            continue
        for x in range(sx):
            # T[y, y'] = prod_{j in S} f_j(y'_j | x) * prod_{j not in S} 1{y'_j = y_j}
            t = np.ones((ny, ny))
            for j in range(k):
                if j in subset:
                    t *= blocked.conditionals[j][x][y_states[:, j]][None, :]
                else:
                    t *= y_states[:, j][:, None] == y_states[:, j][None, :]
            k_mat[x] += weight[x] * t[:, None, :] * x_given_y.T[None, :, :]
    return TransitionMatrix(k_mat.reshape(sx * ny, sx * ny))
