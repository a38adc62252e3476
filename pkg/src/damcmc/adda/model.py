"""Blocked augmentation models for the asynchronous sampler."""

from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core import AugmentedModel
from ..errors import InvalidParameterError

__all__ = ["BlockedAugmentedModel", "discrete_blocked_model", "check_block_locality"]


@dataclass(frozen=True)
class BlockedAugmentedModel:
    """Augmentation y = (y^1, ..., y^k) with blocks conditionally independent given x.

    Attributes
    ----------
    k : int
        Number of blocks (one worker each).
    block_items : tuple of int
        Scalar items per block; workers draw and can be preempted item by item.
    draw_item : callable ``(j, i, x, rng) -> float``
        Item ``i`` of block ``j`` from f(y^j | x); items within a block are
        conditionally independent given x.
    draw_x_given_y : callable ``(y, rng) -> x``
        ``y`` is the flat concatenation of the blocks.
    x_dim : int
    data_subsets : tuple of index tuples, optional
        Observations each block's conditional may read.
    certified : bool
        Conditional independence was verified exactly.
    waiver : str
        Reason conditional independence holds when it cannot be checked exactly.
    """

    k: int
    block_items: tuple
    draw_item: Callable
    draw_x_given_y: Callable
    x_dim: int
    data_subsets: Optional[tuple] = None
    certified: bool = False
    waiver: str = ""
    name: str = "blocked-model"

    def __post_init__(self):
        items = tuple(int(c) for c in self.block_items)
        if self.k < 1 or len(items) != self.k or min(items) < 1:
            raise InvalidParameterError("need k >= 1 blocks, each with at least one item")
        object.__setattr__(self, "block_items", items)
        if self.data_subsets is not None and len(self.data_subsets) != self.k:
            raise InvalidParameterError("one data subset per block")

    @property
    def y_dim(self):
        return sum(self.block_items)

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.block_items)])

    @property
    def admissible(self):
        return self.certified or bool(self.waiver)

    def draw_block(self, j, x, rng):
        return np.array([self.draw_item(j, i, x, rng) for i in range(self.block_items[j])], dtype=float)

    def split_y(self, y):
        y = np.asarray(y, dtype=float)
        off = self.offsets
        return [y[off[j] : off[j + 1]] for j in range(self.k)]

    def draw_y_given_x(self, x, rng):
        return np.concatenate([self.draw_block(j, x, rng) for j in range(self.k)])

    def as_augmented_model(self):
        """Single-block view: all blocks in block order, item by item, then x."""
        return AugmentedModel(self.draw_y_given_x, self.draw_x_given_y, p=self.x_dim, q=self.y_dim,
                              name=f"{self.name}-da")


def discrete_blocked_model(blocked, tol=1e-12):
    """Wrap a finite BlockedDiscreteJoint; x is the length-1 vector (state index,).

    Draws invert the row CDFs with ``bisect`` on one uniform each, which
    reproduces :func:`~damcmc.spectral.discrete.sample_rows` draw for draw
    without per-call array overhead.
    """
    gap = blocked.conditional_independence_gap()
    if gap > tol:
        raise InvalidParameterError(f"blocks are not conditionally independent given x (gap {gap:.3e})")
    block_cdfs = [[row[:-1].tolist() for row in np.cumsum(c, axis=1)] for c in blocked.conditionals]
    x_cdfs = [row[:-1].tolist() for row in np.cumsum(blocked.x_given_y, axis=1)]
    strides = [int(np.prod(blocked.block_sizes[j + 1 :])) for j in range(blocked.k)]

    def draw_item(j, i, x, rng):
        return float(bisect_right(block_cdfs[j][int(x[0])], rng.random()))

    def draw_x(y, rng):
        index = sum(int(v) * s for v, s in zip(y, strides))
        return np.array([float(bisect_right(x_cdfs[index], rng.random()))])

    return BlockedAugmentedModel(k=blocked.k, block_items=(1,) * blocked.k, draw_item=draw_item,
                                 draw_x_given_y=draw_x, x_dim=1, certified=True, name="discrete-blocked")


def check_block_locality(build, data, perturb, x, seed):
    """True iff every block's draws ignore the data outside its subset.

    ``build(data)`` returns a BlockedAugmentedModel with ``data_subsets``;
    ``perturb(data, indices)`` returns a copy of ``data`` changed at ``indices``.
    Block j is drawn under seed ``seed`` from the original and from the data
    perturbed off its subset; the draws must coincide exactly.
    """
    base = build(data)
    if base.data_subsets is None:
        raise InvalidParameterError("model declares no data subsets")
    n_obs = len(np.asarray(data[0] if isinstance(data, tuple) else data))
    for j, subset in enumerate(base.data_subsets):
        outside = np.setdiff1d(np.arange(n_obs), np.asarray(subset, dtype=int))
        other = build(perturb(data, outside))
        a = base.draw_block(j, x, np.random.default_rng(seed))
        b = other.draw_block(j, x, np.random.default_rng(seed))
        if not np.array_equal(a, b):
            return False
    return True
