"""Model-agnostic DA kernels and the chain runner.

Kernels are plain functions over a model object holding the conditional
samplers, so the exact-matrix oracle in :mod:`damcmc.spectral` can drive
the very same code paths that production chains use.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .errors import ChainError, DAMCMCError, SandwichStepError

__all__ = [
    "AugmentedModel",
    "TwoBlockModel",
    "GroupAction",
    "ChainTrace",
    "trivial_group",
    "multiplicative_group",
    "check_group_action",
    "da_step",
    "sandwich_step",
    "haar_pxda_step",
    "two_block_da_step",
    "two_block_pxda_step",
    "run_chain",
]


@dataclass(frozen=True)
class AugmentedModel:
    """A joint f(x, y) given through its two conditional samplers.

    ``draw_y_given_x(x, rng)`` and ``draw_x_given_y(y, rng)`` must be
    conditionals of one joint density; ``log_joint`` is optional and used
    only by diagnostics.
    """

    draw_y_given_x: Callable[[Any, np.random.Generator], Any]
    draw_x_given_y: Callable[[Any, np.random.Generator], Any]
    log_joint: Optional[Callable[[Any, Any], float]] = None
    p: Optional[int] = None
    q: Optional[int] = None
    name: str = "augmented-model"


@dataclass(frozen=True)
class TwoBlockModel:
    """Joint f(u, v, y) for the two-block DA chain on x = (u, v).

    ``x`` is the concatenation of ``u`` (first ``u_dim`` entries along the
    last axis) and ``v``. ``draw_g(variant, x, y, rng)`` is optional and
    supplies group draws for :func:`two_block_pxda_step`.
    """

    draw_y_given_x: Callable
    draw_u_given_vy: Callable
    draw_v_given_uy: Callable
    u_dim: int
    draw_g: Optional[Callable] = None
    name: str = "two-block-model"

    def split(self, x):
        x = np.asarray(x)
        return x[..., : self.u_dim], x[..., self.u_dim :]

    def join(self, u, v):
        return np.concatenate([np.asarray(u), np.asarray(v)], axis=-1)


@dataclass(frozen=True)
class GroupAction:
    """A group acting on the augmentation space.

    ``act(g, y)`` is t_g(y), ``multiplier(g)`` is chi(g) and ``log_haar(g)``
    the log density of left-Haar measure in the group coordinate.
    """

    identity: Any
    compose: Callable[[Any, Any], Any]
    invert: Callable[[Any], Any]
    act: Callable[[Any, Any], Any]
    multiplier: Callable[[Any], float]
    log_haar: Callable[[Any], float]
    name: str = "group"


def trivial_group():
    return GroupAction(
        identity=None,
        compose=lambda g1, g2: None,
        invert=lambda g: None,
        act=lambda g, y: y,
        multiplier=lambda g: 1.0,
        log_haar=lambda g: 0.0,
        name="trivial",
    )


def multiplicative_group(chi_power):
    """Positive reals under multiplication acting by scaling, chi(g) = g**chi_power, Haar dg/g."""
    return GroupAction(
        identity=1.0,
        compose=lambda g1, g2: g1 * g2,
        invert=lambda g: 1.0 / g,
        act=lambda g, y: g * np.asarray(y),
        multiplier=lambda g: g ** chi_power,
        log_haar=lambda g: -np.log(g),
        name=f"scale(chi=g^{chi_power})",
    )


def check_group_action(group, ys, gs, tol=1e-12):
    """Check identity, compatibility of the action and multiplicativity of chi.

    Returns the list of failures (empty when all pass).
    """
    failures = []
    for y in ys:
        if not np.allclose(group.act(group.identity, y), y, rtol=0, atol=tol):
            failures.append(("identity", y))
    for g1 in gs:
        for g2 in gs:
            g12 = group.compose(g1, g2)
            c12, c1, c2 = group.multiplier(g12), group.multiplier(g1), group.multiplier(g2)
            if abs(c12 - c1 * c2) > tol * max(1.0, abs(c12)):
                failures.append(("multiplier", g1, g2))
            for y in ys:
                lhs = np.asarray(group.act(g12, y), dtype=float)
                rhs = np.asarray(group.act(g1, group.act(g2, y)), dtype=float)
                if not np.allclose(lhs, rhs, rtol=tol, atol=tol):
                    failures.append(("action", g1, g2, y))
    return failures


def da_step(model, x, rng):
    """x -> y ~ f(y|x) -> x' ~ f(x'|y)."""
    y = model.draw_y_given_x(x, rng)
    return model.draw_x_given_y(y, rng)


def sandwich_step(model, middle, x, rng):
    """Generic sandwich: x -> y -> y' ~ r(.|y) -> x'. ``middle(y, rng)`` must leave f_Y invariant."""
    y = model.draw_y_given_x(x, rng)
    y_new = middle(y, rng)
    return model.draw_x_given_y(y_new, rng)


def haar_pxda_step(model, group, draw_g, x, rng):
    """Haar PX-DA: the middle step draws g with density proportional to
    f_Y(t_g y) chi(g) nu_l(g) via ``draw_g(y, rng)`` and moves to t_g(y).

    The normalizer q(y) of that density must be finite for almost every y.
    Only the sampled y can be checked: a non-finite t_g(y) raises
    SandwichStepError.
    """
    y = model.draw_y_given_x(x, rng)
    g = draw_g(y, rng)
    y_new = group.act(g, y)
    if not np.all(np.isfinite(y_new)):
        raise SandwichStepError("group-element draw left the augmentation space; q(y) is not finite here")
    return model.draw_x_given_y(y_new, rng)


def two_block_da_step(model, x, rng):
    """y ~ f(y|u, v), then u' ~ f(u|v, y), then v' ~ f(v|u', y)."""
    u, v = model.split(x)
    y = model.draw_y_given_x(x, rng)
    u_new = model.draw_u_given_vy(v, y, rng)
    v_new = model.draw_v_given_uy(u_new, y, rng)
    return model.join(u_new, v_new)


def two_block_pxda_step(model, group, variant, x, rng, draw_g=None):
    """Two-block Haar PX-DA. ``variant`` 1 draws g from f^1 (proportional to
    f_{V,Y}(v, t_g y) chi(g)), variant 2 from f^2 (f_{U,V,Y}(u, v, t_g y) chi(g))."""
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    sampler = draw_g if draw_g is not None else model.draw_g
    if sampler is None:
        raise ValueError("no group sampler supplied")
    u, v = model.split(x)
    y = model.draw_y_given_x(x, rng)
    g = sampler(variant, x, y, rng)
    gy = group.act(g, y)
    u_new = model.draw_u_given_vy(v, gy, rng)
    v_new = model.draw_v_given_uy(u_new, gy, rng)
    return model.join(u_new, v_new)


@dataclass
class ChainTrace:
    """Post-burn-in draws, one row per iteration, plus run metadata."""

    draws: np.ndarray
    seed: Optional[int] = None
    kernel: str = ""
    model: str = ""
    burn_in: int = 0
    iteration_seconds: np.ndarray = field(default_factory=lambda: np.empty(0))
    columns: Optional[list] = None
    extra: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.draws.shape[0]

    def column(self, key):
        if isinstance(key, str):
            key = self.columns.index(key)
        return self.draws[:, key]


def run_chain(kernel, init, n, rng, burn_in=0, seed=None, kernel_id="", model_id="", columns=None):
    """Iterate ``kernel(x, rng)`` from ``init``; keep ``n`` states after ``burn_in``.

    A kernel exception is re-raised as ChainError carrying the partial trace.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    x = np.asarray(init, dtype=float)
    draws = np.empty((n, x.size))
    seconds = np.empty(n)
    clock = time.perf_counter
    i = -burn_in
    try:
        for i in range(-burn_in, n):
            t0 = clock()
            x = np.asarray(kernel(x, rng), dtype=float)
            if i >= 0:
                draws[i] = x.ravel()
                seconds[i] = clock() - t0
    except (DAMCMCError, np.linalg.LinAlgError, FloatingPointError) as exc:
        kept = max(i, 0)
        partial = ChainTrace(draws[:kept].copy(), seed, kernel_id, model_id, burn_in, seconds[:kept].copy(), columns)
        raise ChainError(f"kernel failed at iteration {i + burn_in}: {exc}", partial) from exc
    return ChainTrace(draws, seed, kernel_id, model_id, burn_in, seconds, columns)
