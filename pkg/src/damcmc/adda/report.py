"""Cost/mixing tradeoff table across (r, epsilon) settings."""

import csv
import io
from dataclasses import astuple, dataclass, fields

import numpy as np

from ..diagnostics import effective_sample_size
from ..rng import RngStream
from .engine import AddaConfig, adda_run

__all__ = ["WallClockRow", "AddaReport", "adda_wall_clock_report"]


@dataclass(frozen=True)
class WallClockRow:
    r: float
    epsilon: float
    wait: int
    iterations: int
    seconds_per_iteration: float
    ess: float
    ess_per_second: float


@dataclass
class AddaReport:
    rows: list

    def to_csv(self, handle=None):
        """Write the table; returns the CSV text when ``handle`` is None."""
        out = handle if handle is not None else io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow([f.name for f in fields(WallClockRow)])
        for row in self.rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in astuple(row)])
        return out.getvalue() if handle is None else None


def adda_wall_clock_report(model, configs, n, init, seed, latency=None, schedule_factory=None,
                           functional=None, burn_in=0):
    """Run every (r, epsilon) pair from the same seeds and tabulate cost and ESS.

    Cost is virtual seconds under ``latency`` when given, otherwise measured
    wall-clock seconds. ESS is taken for ``functional(draws_x)`` (default:
    the minimum over x coordinates).
    """
    rows = []
    for r, eps in configs:
        config = AddaConfig(model.k, r, eps)
        rng = RngStream(seed).generator()
        schedule = schedule_factory() if schedule_factory is not None else None
        trace = adda_run(model, config, n, init, rng, schedule=schedule, latency=latency, burn_in=burn_in,
                         seed=seed)
        x = trace.draws[:, : model.x_dim]
        if functional is not None:
            ess = effective_sample_size(functional(x))
        else:
            ess = min(effective_sample_size(x[:, i]) for i in range(model.x_dim))
        seconds = trace.extra["virtual_seconds"] if latency is not None else trace.iteration_seconds
        per_iter = float(np.mean(seconds))
        total = float(np.sum(seconds))
        rows.append(WallClockRow(float(r), float(eps), config.wait, n, per_iter, float(ess),
                                 float(ess / total) if total > 0 else float("inf")))
    return AddaReport(rows)
