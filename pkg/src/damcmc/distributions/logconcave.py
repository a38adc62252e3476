"""Rejection sampling for univariate log-concave densities.

The envelope is the upper hull of tangent lines at three fixed abscissae:
the mode and one scale unit either side of it (clipped to the support).
No adaptation, so the draw is exact and the per-call cost is predictable.
"""

import math

from ..errors import SandwichStepError

__all__ = ["sample_log_concave"]


def _logaddexp(x, y):
    if x == -math.inf:
        return y
    if y == -math.inf:
        return x
    m = max(x, y)
    return m + math.log(math.exp(x - m) + math.exp(y - m))


def _log_piece_mass(h_left, s, width):
    """log of int_0^width exp(h_left + s t) dt."""
    if width == math.inf:
        return h_left - math.log(-s)
    if abs(s) * width < 1e-12:
        return h_left + math.log(width)
    d = s * width
    return h_left + math.log(math.expm1(d) / s)


def sample_log_concave(logf, dlogf, mode, scale, rng, lower=0.0, upper=math.inf, max_attempts=10_000):
    """Exact draw from the density proportional to ``exp(logf(x))`` on ``(lower, upper)``.

    ``logf`` must be concave; ``dlogf`` is its derivative. ``mode`` may sit
    on the lower boundary. Raises SandwichStepError after ``max_attempts``
    rejections.
    """
    # tangents need a finite log-density, so a boundary mode is nudged inward
    if mode <= lower:
        mode = lower + 1e-9 * scale
    points = [mode]
    if mode - scale > lower:
        points.insert(0, mode - scale)
    elif mode > lower:
        points.insert(0, lower + 0.5 * (mode - lower))
    if mode + scale < upper:
        points.append(mode + scale)
    points = sorted(set(p for p in points if lower <= p <= upper))
    h = [logf(p) for p in points]
    s = [dlogf(p) for p in points]
    if upper == math.inf and s[-1] >= 0:
        raise ValueError("envelope needs a negative slope on the right for an unbounded support")

    # breakpoints between consecutive tangents
    edges = [lower]
    for i in range(len(points) - 1):
        if abs(s[i] - s[i + 1]) < 1e-300:
            z = 0.5 * (points[i] + points[i + 1])
        else:
            z = (h[i + 1] - h[i] - points[i + 1] * s[i + 1] + points[i] * s[i]) / (s[i] - s[i + 1])
        edges.append(min(max(z, edges[-1]), upper))
    edges.append(upper)

    pieces = []
    for i in range(len(points)):
        left, right = edges[i], edges[i + 1]
        if right <= left:
            continue
        h_left = h[i] + s[i] * (left - points[i])
        pieces.append((left, right - left, h_left, s[i], i))
    log_masses = [_log_piece_mass(hl, si, w) for (_, w, hl, si, _) in pieces]
    m = max(log_masses)
    weights = [math.exp(lm - m) for lm in log_masses]
    total = sum(weights)

    for _ in range(max_attempts):
        u = rng.random() * total
        k = 0
        while k < len(weights) - 1 and u > weights[k]:
            u -= weights[k]
            k += 1
        left, width, h_left, sk, i = pieces[k]
        v = rng.random()
        if width == math.inf or abs(sk) * width >= 1e-12:
            d = sk * width
            log1mv = math.log1p(-v) if v < 1.0 else -math.inf
            lv = math.log(v) if v > 0.0 else -math.inf
            x = left + _logaddexp(log1mv, lv + d) / sk
        else:
            x = left + v * width
        hull = h_left + sk * (x - left)
        if math.log(1.0 - rng.random()) <= logf(x) - hull:
            return x
    raise SandwichStepError(f"log-concave rejection sampler exceeded {max_attempts} attempts")
