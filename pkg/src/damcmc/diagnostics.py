"""Output analysis for MCMC traces: autocorrelation, batch-means standard
errors, effective sample size and side-by-side kernel comparisons."""

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "DegenerateTraceError",
    "BatchMeans",
    "autocorrelation",
    "batch_means_se",
    "effective_sample_size",
    "lag1_acf_with_se",
    "FunctionalSummary",
    "DiagnosticsReport",
    "diagnose",
    "compare_kernels",
]


class DegenerateTraceError(InvalidParameterError):
    """The trace is constant, so autocorrelations are undefined."""


class BatchMeans(NamedTuple):
    mean: float
    se: float
    batches: int
    degenerate: bool


def _column(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidParameterError("expected a single trace column")
    if x.size == 0:
        raise InvalidParameterError("empty trace")
    return x


def _autocov(x, max_lag):
    """Biased autocovariances for lags 0..max_lag via FFT."""
    n = x.size
    d = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(d, size)
    acov = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1] / n
    return acov


def autocorrelation(x, lags):
    """Autocorrelation estimates sum_t (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2."""
    x = _column(x)
    lags = np.atleast_1d(np.asarray(lags, dtype=int))
    if np.any(lags < 0):
        raise InvalidParameterError("lags must be non-negative")
    max_lag = int(lags.max())
    if x.size <= max_lag:
        raise InvalidParameterError("trace shorter than the largest lag")
    acov = _autocov(x, max_lag)
    if acov[0] <= 0 or np.ptp(x) == 0:
        raise DegenerateTraceError("constant trace has no autocorrelation")
    out = acov[lags] / acov[0]
    out[lags == 0] = 1.0
    return out


def batch_means_se(x, batches=None):
    """Non-overlapping batch-means estimate of the Monte Carlo standard error.

    ``batches`` defaults to floor(sqrt(n)); leading draws that do not fill a
    batch are dropped from the variance estimate but not from the mean.
    """
    x = _column(x)
    n = x.size
    a = int(math.isqrt(n)) if batches is None else int(batches)
    if a < 2 or n < 2 * a:
        raise InvalidParameterError(f"need n >= 2 * batches with at least 2 batches (n={n}, batches={a})")
    b = n // a
    means = x[n - a * b :].reshape(a, b).mean(axis=1)
    se = math.sqrt(means.var(ddof=1) * b / n)
    degenerate = np.ptp(x) == 0
    return BatchMeans(float(x.mean()), 0.0 if degenerate else se, a, bool(degenerate))


def effective_sample_size(x):
    """n / (1 + 2 sum_k rho_k) with the sum truncated by the initial monotone
    positive sequence of paired autocorrelations; capped at n."""
    x = _column(x)
    n = x.size
    if n == 1:
        return 1.0
    if np.ptp(x) == 0:
        raise DegenerateTraceError("constant trace has no effective sample size")
    acov = _autocov(x, n - 1)
    rho = acov / acov[0]
    pairs = rho[0 : n - 1 : 2][: (n - 1) // 2]
    pairs = pairs + rho[1:n:2][: pairs.size]
    tau = -1.0
    running = math.inf
    for gamma in pairs:
        if gamma <= 0:
            break
        running = min(running, gamma)
        tau += 2.0 * running
    if tau <= 0:
        tau = 1.0 / n
    return float(min(n, n / tau))


def lag1_acf_with_se(x, batches=None):
    """Lag-1 autocorrelation and its batch-means standard error, treating the
    estimate as the mean of the products (x_t - m)(x_{t+1} - m) / var."""
    x = _column(x)
    d = x - x.mean()
    v = np.mean(d * d)
    if v <= 0:
        raise DegenerateTraceError("constant trace has no autocorrelation")
    z = d[:-1] * d[1:] / v
    acf1 = float(autocorrelation(x, [1])[0])
    return acf1, batch_means_se(z, batches).se


@dataclass
class FunctionalSummary:
    name: str
    mean: float
    se: float
    ess: float
    acf: dict
    acf1: float
    acf1_se: float


@dataclass
class DiagnosticsReport:
    n: int
    rows: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)

    def to_dict(self):
        return {"n": self.n, "rows": [asdict(r) for r in self.rows], "comparisons": list(self.comparisons)}

    def to_csv_rows(self):
        lags = sorted({lag for r in self.rows for lag in r.acf})
        header = ["functional", "mean", "se", "ess", "acf1", "acf1_se"] + [f"acf_{lag}" for lag in lags]
        body = [[r.name, r.mean, r.se, r.ess, r.acf1, r.acf1_se] + [r.acf.get(lag, "") for lag in lags] for r in self.rows]
        return [header] + body


def _summary(name, x, lags, batches=None):
    bm = batch_means_se(x, batches)
    acf = autocorrelation(x, lags)
    acf1, acf1_se = lag1_acf_with_se(x, batches)
    return FunctionalSummary(name, bm.mean, bm.se, effective_sample_size(x),
                             {int(k): float(v) for k, v in zip(lags, acf)}, acf1, acf1_se)


def diagnose(draws, names=None, lags=(1, 5, 10), batches=None):
    """Per-column summaries of a draws matrix."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    names = names or [f"x{j}" for j in range(draws.shape[1])]
    report = DiagnosticsReport(draws.shape[0])
    for j, name in enumerate(names):
        report.rows.append(_summary(name, draws[:, j], list(lags), batches))
    return report


def compare_kernels(traces, functional=None, lags=(1,), batches=None, z=2.0):
    """Summaries of one functional across kernels plus pairwise lag-1 ACF flags.

    ``traces`` maps a kernel id to a draws array; ``functional`` maps a draws
    array to a 1-D series (default: first column). For each ordered pair the
    flag is ``"lower"``, ``"higher"`` or ``"indistinguishable"`` according to
    whether the lag-1 ACF difference exceeds ``z`` combined standard errors.
    """
    series = {}
    for kid, draws in traces.items():
        arr = np.asarray(draws, dtype=float)
        series[kid] = functional(arr) if functional is not None else (arr if arr.ndim == 1 else arr[:, 0])
    lengths = {s.size for s in series.values()}
    if len(lengths) != 1:
        raise InvalidParameterError("traces must have equal length")
    report = DiagnosticsReport(lengths.pop())
    for kid, s in series.items():
        report.rows.append(_summary(kid, s, list(lags), batches))
    for a in report.rows:
        for b in report.rows:
            if a.name == b.name:
                continue
            diff = a.acf1 - b.acf1
            comb = math.hypot(a.acf1_se, b.acf1_se)
            flag = "lower" if diff < -z * comb else "higher" if diff > z * comb else "indistinguishable"
            report.comparisons.append({"kernel": a.name, "versus": b.name, "acf1_diff": diff,
                                       "combined_se": comb, "flag": flag,
                                       "ess_ratio": a.ess / b.ess})
    return report
