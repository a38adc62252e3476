"""Messages and the manager/worker state machines.

The manager holds only the current epoch's state, so the joint (x, y)
process it drives is Markov: the next state is a function of the current
(x, y), the selection of responding workers and fresh randomness.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ProtocolError

__all__ = ["ParamBroadcast", "BlockUpdate", "Shutdown", "SHUTDOWN", "Manager", "Worker"]


@dataclass(frozen=True)
class ParamBroadcast:
    epoch: int
    x: np.ndarray


@dataclass(frozen=True)
class BlockUpdate:
    block: int
    epoch: int
    y: np.ndarray


class Shutdown:
    """Poison pill telling a worker to exit."""

    def __repr__(self):
        return "Shutdown()"


SHUTDOWN = Shutdown()


class Manager:
    """Collects block updates for the current epoch and draws the next x.

    ``last_epoch[j]`` is the epoch of the latest message from worker j and
    enforces the per-sender ordering contract; it never feeds the draws.
    """

    STATE_FIELDS = ("k", "epoch", "x", "blocks", "need", "received", "last_epoch")
    __slots__ = STATE_FIELDS

    def __init__(self, k, x, blocks):
        self.k = k
        self.epoch = 0
        self.x = np.asarray(x, dtype=float)
        self.blocks = [np.asarray(b, dtype=float) for b in blocks]
        self.need = k
        self.received = {}
        self.last_epoch = [-1] * k

    def snapshot(self):
        return {name: getattr(self, name) for name in self.STATE_FIELDS}

    def begin_epoch(self, need):
        if not 1 <= need <= self.k:
            raise ProtocolError(f"wait count {need} outside [1, {self.k}]", self.snapshot())
        self.need = need
        self.received = {}
        return ParamBroadcast(self.epoch, self.x.copy())

    @property
    def satisfied(self):
        return len(self.received) >= self.need

    def receive(self, msg):
        """Returns ``"accepted"`` or ``"stale"``; contract violations raise ProtocolError."""
        j = msg.block
        if not 0 <= j < self.k:
            raise ProtocolError(f"update from unknown block {j}", self.snapshot())
        if msg.epoch > self.epoch:
            raise ProtocolError(f"block {j} sent epoch {msg.epoch} ahead of manager epoch {self.epoch}",
                                self.snapshot())
        if msg.epoch < self.last_epoch[j]:
            raise ProtocolError(f"block {j} reordered: epoch {msg.epoch} after {self.last_epoch[j]}",
                                self.snapshot())
        if msg.epoch == self.last_epoch[j]:
            raise ProtocolError(f"duplicate update from block {j} for epoch {msg.epoch}", self.snapshot())
        self.last_epoch[j] = msg.epoch
        if msg.epoch < self.epoch or self.satisfied:
            return "stale"
        self.received[j] = np.asarray(msg.y, dtype=float)
        return "accepted"

    def finish(self, draw_x_given_y, rng):
        """Splice the received blocks into y and draw the next x."""
        if not self.satisfied:
            raise ProtocolError("epoch closed before enough updates arrived", self.snapshot())
        for j, y in self.received.items():
            self.blocks[j] = y
        y = np.concatenate(self.blocks)
        self.x = np.asarray(draw_x_given_y(y, rng), dtype=float)
        self.epoch += 1
        self.received = {}
        return self.x, y


class Worker:
    """Draws one block item by item; a newer broadcast discards the partial block."""

    STATE_FIELDS = ("block", "items", "draw_item", "epoch", "x", "partial")
    __slots__ = STATE_FIELDS

    def __init__(self, block, items, draw_item):
        self.block = block
        self.items = items
        self.draw_item = draw_item
        self.epoch = -1
        self.x = None
        self.partial = []

    @property
    def busy(self):
        return self.x is not None

    def on_broadcast(self, msg):
        if msg.epoch <= self.epoch:
            raise ProtocolError(f"worker {self.block} got epoch {msg.epoch} after {self.epoch}")
        self.epoch = msg.epoch
        self.x = msg.x
        self.partial = []

    def step(self, rng):
        """Draw one item; returns the BlockUpdate once the block is complete."""
        if not self.busy:
            return None
        self.partial.append(self.draw_item(self.block, len(self.partial), self.x, rng))
        if len(self.partial) < self.items:
            return None
        update = BlockUpdate(self.block, self.epoch, np.array(self.partial, dtype=float))
        self.x = None
        self.partial = []
        return update

    def run(self, rng, limit=None):
        """Step until the block completes or ``limit`` more items were drawn."""
        done = 0
        while self.busy and (limit is None or done < limit):
            update = self.step(rng)
            done += 1
            if update is not None:
                return update
        return None
