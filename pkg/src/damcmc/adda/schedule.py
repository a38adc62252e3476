"""Completion schedules: which workers answer each epoch, and in what order."""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import InvalidParameterError

__all__ = ["EpochPlan", "CompletionSchedule", "LatencyModel", "LatencySchedule"]


@dataclass(frozen=True)
class EpochPlan:
    """``order``: workers completing their block, in arrival order.
    ``truncation``: items drawn by the remaining workers before preemption.
    ``elapsed``: virtual seconds spent on the epoch."""

    order: tuple
    truncation: dict = field(default_factory=dict)
    elapsed: float = 0.0


def _check_order(order, k):
    order = tuple(int(j) for j in order)
    if len(set(order)) != len(order) or any(not 0 <= j < k for j in order):
        raise InvalidParameterError(f"arrival order {order} must list distinct workers in [0, {k})")
    return order


class CompletionSchedule:
    """Scripted arrivals for reproducible runs.

    Exactly one of ``orders`` (cycled per epoch) or ``order_fn(epoch, x)``
    gives the arrival order. Workers not listed draw ``truncation[j]``
    items (default 0) before being preempted; if the manager still needs
    updates, missing workers complete after the listed ones in block order.
    Listed workers arriving after the manager is satisfied are delivered
    late and discarded as stale.
    """

    def __init__(self, orders=None, order_fn: Optional[Callable] = None,
                 truncations: Optional[Sequence[dict]] = None):
        if (orders is None) == (order_fn is None):
            raise InvalidParameterError("give exactly one of orders or order_fn")
        self.orders = None if orders is None else [tuple(o) for o in orders]
        if self.orders is not None and not self.orders:
            raise InvalidParameterError("orders must not be empty")
        self.order_fn = order_fn
        self.truncations = None if truncations is None else list(truncations)

    @classmethod
    def in_order(cls, k):
        return cls(orders=[tuple(range(k))])

    @classmethod
    def shuffled(cls, rng, k):
        """Uniformly random arrival order each epoch, from its own generator."""
        return cls(order_fn=lambda epoch, x: tuple(rng.permutation(k)))

    def check(self, k):
        """Validate every scripted order against ``k`` workers up front."""
        for order in self.orders or ():
            _check_order(order, k)
        return self

    def plan(self, epoch, x, need, k):
        if self.order_fn is not None:
            order = self.order_fn(epoch, x)
        else:
            order = self.orders[epoch % len(self.orders)]
        order = _check_order(order, k)
        trunc = {}
        if self.truncations is not None:
            trunc = {int(j): int(c) for j, c in self.truncations[epoch % len(self.truncations)].items()
                     if int(j) not in order}
        return EpochPlan(order, trunc, 0.0)


@dataclass(frozen=True)
class LatencyModel:
    """Exponential per-item compute times with per-worker speed factors.

    ``item_mean`` seconds per item, scaled by ``speeds[j]``; ``manager_cost``
    seconds for the x-draw and broadcast each epoch.
    """

    item_mean: float = 1.0
    speeds: Optional[tuple] = None
    manager_cost: float = 0.0

    def schedule(self, rng, block_items):
        return LatencySchedule(self, rng, tuple(block_items))


class LatencySchedule:
    """Virtual-time arrivals. All workers restart at each broadcast; the
    epoch ends at the ``need``-th completion and the rest are preempted
    after the items they finished by then."""

    def __init__(self, latency, rng, block_items):
        self.latency = latency
        self.rng = rng
        self.block_items = block_items
        k = len(block_items)
        speeds = latency.speeds if latency.speeds is not None else (1.0,) * k
        if len(speeds) != k or min(speeds) <= 0:
            raise InvalidParameterError("one positive speed factor per worker")
        self.means = np.asarray(speeds, dtype=float) * latency.item_mean

    def plan(self, epoch, x, need, k):
        times = [np.cumsum(self.rng.exponential(self.means[j], size=c)) for j, c in enumerate(self.block_items)]
        finish = np.array([t[-1] for t in times])
        order = np.argsort(finish, kind="stable")
        cutoff = float(finish[order[need - 1]])
        arrived = tuple(int(j) for j in order[:need])
        trunc = {int(j): min(int(np.searchsorted(times[j], cutoff, side="right")), self.block_items[j] - 1)
                 for j in order[need:]}
        return EpochPlan(arrived, trunc, cutoff + self.latency.manager_cost)
