"""The asynchronous DA run loop: scripted, virtual-time and threaded drivers."""

import math
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..core import ChainTrace
from ..errors import InvalidParameterError, PreconditionError, ProtocolError
from .protocol import SHUTDOWN, Manager, ParamBroadcast, Shutdown, Worker
from .schedule import CompletionSchedule

__all__ = ["AddaConfig", "FaultPlan", "adda_run"]


@dataclass(frozen=True)
class AddaConfig:
    """k workers; with probability ``epsilon`` wait for all of them, otherwise for ceil(k r)."""

    k: int
    r: float = 1.0
    epsilon: float = 1.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameterError("k must be a positive integer")
        if not 0 < self.r <= 1:
            raise InvalidParameterError("r must lie in (0, 1]")
        if not 0 < self.epsilon <= 1:
            raise InvalidParameterError("epsilon must lie in (0, 1]")

    @property
    def wait(self):
        # guard against k * r landing a rounding error above an integer
        return min(self.k, max(1, math.ceil(self.k * self.r - 1e-12)))


@dataclass(frozen=True)
class FaultPlan:
    """Transport faults keyed by (block, epoch): the update is sent twice,
    lost, or held back until after the same worker's next update."""

    duplicate: frozenset = frozenset()
    drop: frozenset = frozenset()
    reorder: frozenset = frozenset()


class _Channel:
    """Per-sender FIFO worker-to-manager channel with optional fault injection."""

    def __init__(self, faults):
        self.inbox = deque()
        self.faults = faults or FaultPlan()
        self.held = {}

    def send(self, msg):
        key = (msg.block, msg.epoch)
        if key in self.faults.drop:
            return
        if key in self.faults.reorder:
            self.held[msg.block] = msg
            return
        self.inbox.append(msg)
        if key in self.faults.duplicate:
            self.inbox.append(msg)
        late = self.held.pop(msg.block, None)
        if late is not None:
            self.inbox.append(late)


def _need(config, rng):
    wait = config.wait
    if config.epsilon >= 1.0 or wait == config.k:
        return config.k
    return config.k if rng.random() < config.epsilon else wait


def _initial_blocks(model, x0, y0, rng):
    if y0 is None:
        # a spawned generator keeps the chain stream untouched
        y0 = model.draw_y_given_x(x0, rng.spawn(1)[0])
    y0 = np.asarray(y0, dtype=float)
    if y0.size != model.y_dim:
        raise InvalidParameterError(f"initial y must have {model.y_dim} entries")
    return model.split_y(y0)


def _sequential(model, config, n, burn_in, x0, blocks, rng, schedule, faults, budget):
    k = model.k
    manager = Manager(k, x0, blocks)
    workers = [Worker(j, model.block_items[j], model.draw_item) for j in range(k)]
    channel = _Channel(faults)
    total = n + burn_in
    rows = np.empty((n, model.x_dim + model.y_dim))
    wall = np.empty(n)
    virtual = np.empty(n)
    stale = 0
    full = 0
    for it in range(total):
        t0 = time.perf_counter()
        need = _need(config, rng)
        full += need == k
        msg = manager.begin_epoch(need)
        for w in workers:
            w.on_broadcast(msg)
        plan = schedule.plan(msg.epoch, msg.x, need, k)
        for j in plan.order:
            update = workers[j].run(rng)
            if update is not None:
                channel.send(update)
        for j, count in plan.truncation.items():
            # a preempted worker never sends a partial block
            if count > 0 and workers[j].run(rng, limit=min(count, model.block_items[j] - 1)) is not None:
                raise ProtocolError("truncated worker completed its block", manager.snapshot())
        processed = 0
        while not manager.satisfied:
            if channel.inbox:
                stale += manager.receive(channel.inbox.popleft()) == "stale"
                processed += 1
                if processed > budget:
                    raise ProtocolError("message budget exhausted without progress", manager.snapshot())
                continue
            pending = [w for w in workers if w.busy]
            if not pending:
                raise ProtocolError("deadlock: manager is waiting but no update can arrive",
                                    manager.snapshot())
            update = pending[0].run(rng)
            if update is not None:
                channel.send(update)
        x, y = manager.finish(model.draw_x_given_y, rng)
        if it >= burn_in:
            i = it - burn_in
            rows[i, : model.x_dim] = x
            rows[i, model.x_dim :] = y
            wall[i] = time.perf_counter() - t0
            virtual[i] = plan.elapsed
    return rows, wall, virtual, stale, full


def _worker_loop(worker, inbox, outbox, rng):
    while True:
        msg = inbox.get()
        while True:
            if isinstance(msg, Shutdown):
                return
            worker.on_broadcast(msg)
            update = None
            preempted = None
            while worker.busy:
                try:
                    preempted = inbox.get_nowait()
                    break
                except queue.Empty:
                    update = worker.step(rng)
            if preempted is not None:
                msg = preempted
                continue
            if update is not None:
                outbox.put(update)
            break


def _threaded(model, config, n, burn_in, x0, blocks, rng, timeout):
    k = model.k
    manager = Manager(k, x0, blocks)
    outbox = queue.Queue()
    inboxes = [queue.Queue() for _ in range(k)]
    worker_rngs = rng.spawn(k)
    threads = [threading.Thread(target=_worker_loop,
                                args=(Worker(j, model.block_items[j], model.draw_item), inboxes[j], outbox,
                                      worker_rngs[j]), daemon=True)
               for j in range(k)]
    for t in threads:
        t.start()
    rows = np.empty((n, model.x_dim + model.y_dim))
    wall = np.empty(n)
    stale = 0
    full = 0
    try:
        for it in range(n + burn_in):
            t0 = time.perf_counter()
            need = _need(config, rng)
            full += need == k
            msg = manager.begin_epoch(need)
            for box in inboxes:
                box.put(msg)
            while not manager.satisfied:
                try:
                    update = outbox.get(timeout=timeout)
                except queue.Empty:
                    raise ProtocolError(f"deadlock: no update within {timeout} s", manager.snapshot()) from None
                stale += manager.receive(update) == "stale"
            x, y = manager.finish(model.draw_x_given_y, rng)
            if it >= burn_in:
                rows[it - burn_in, : model.x_dim] = x
                rows[it - burn_in, model.x_dim :] = y
                wall[it - burn_in] = time.perf_counter() - t0
    finally:
        for box in inboxes:
            box.put(SHUTDOWN)
        for t in threads:
            t.join(timeout)
    return rows, wall, np.zeros(n), stale, full


def adda_run(model, config, n, init, rng, schedule=None, latency=None, driver="sequential",
             burn_in=0, faults=None, message_budget=10_000, timeout=10.0, seed=None):
    """Run the asynchronous DA chain and record the joint (x, y) state.

    Parameters
    ----------
    model : BlockedAugmentedModel
        Must be certified or carry a waiver.
    config : AddaConfig
    n : int
        Recorded iterations after ``burn_in``.
    init : x0 or (x0, y0)
        Without y0 the initial blocks are drawn from f(y | x0).
    rng : numpy.random.Generator
        Drives the epsilon coin, block draws and x draws (sequential driver);
        the threaded driver spawns one generator per worker from it.
    schedule : CompletionSchedule, optional
        Sequential driver arrivals; defaults to a uniformly shuffled order
        from a generator spawned off ``rng``.
    latency : LatencyModel, optional
        Virtual-time arrivals; takes precedence over ``schedule``.
    driver : "sequential" or "threads"
    faults : FaultPlan, optional
        Sequential driver only.

    Returns
    -------
    ChainTrace
        ``draws`` rows are (x, y); ``extra`` holds virtual seconds per
        iteration, the number of stale updates discarded and the number of
        epochs that waited for every worker.
    """
    if not model.admissible:
        raise PreconditionError("blocked model is neither certified nor waived for conditional independence")
    if config.k != model.k:
        raise InvalidParameterError(f"config has k={config.k} but the model has {model.k} blocks")
    if n <= 0 or burn_in < 0:
        raise InvalidParameterError("need n > 0 and burn_in >= 0")
    if isinstance(init, tuple) and len(init) == 2:
        x0, y0 = init
    else:
        x0, y0 = init, None
    x0 = np.asarray(x0, dtype=float).ravel()
    blocks = _initial_blocks(model, x0, y0, rng)
    if driver == "threads":
        if faults is not None or schedule is not None or latency is not None:
            raise InvalidParameterError("the threaded driver takes no schedule, latency model or faults")
        rows, wall, virtual, stale, full = _threaded(model, config, n, burn_in, x0, blocks, rng, timeout)
    elif driver == "sequential":
        if latency is not None:
            schedule = latency.schedule(rng.spawn(1)[0], model.block_items)
        elif schedule is None:
            schedule = CompletionSchedule.shuffled(rng.spawn(1)[0], model.k)
        rows, wall, virtual, stale, full = _sequential(model, config, n, burn_in, x0, blocks, rng, schedule,
                                                       faults, message_budget)
    else:
        raise InvalidParameterError(f"unknown driver {driver!r}")
    columns = [f"x{i}" for i in range(model.x_dim)] + [f"y{i}" for i in range(model.y_dim)]
    return ChainTrace(rows, seed, f"adda(k={config.k},r={config.r},eps={config.epsilon})", model.name,
                      burn_in, wall, columns,
                      {"virtual_seconds": virtual, "stale_updates": stale, "full_epochs": full,
                       "wait": config.wait})
