import math

import numpy as np
import pytest

from damcmc.diagnostics import (
    DegenerateTraceError,
    autocorrelation,
    batch_means_se,
    compare_kernels,
    diagnose,
    effective_sample_size,
)
from damcmc.errors import InvalidParameterError
from damcmc.rng import make_rng


def ar1(phi, n, seed):
    rng = make_rng(seed)
    e = rng.standard_normal(n) * math.sqrt(1 - phi * phi)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    for t in range(1, n):
        x[t] = phi * x[t - 1] + e[t]
    return x


@pytest.fixture(scope="module")
def ar09():
    return ar1(0.9, 1_000_000, 5)


@pytest.fixture(scope="module")
def iid():
    return make_rng(6).standard_normal(1_000_000)


class TestAutocorrelation:
    def test_iid(self, iid):
        assert abs(autocorrelation(iid, [1])[0]) <= 3 / math.sqrt(iid.size)

    def test_ar1(self, ar09):
        acf1, = autocorrelation(ar09, [1])
        # asymptotic SE of the lag-1 estimate for AR(1): sqrt((1 - phi^2) / n)
        assert abs(acf1 - 0.9) <= 3 * math.sqrt((1 - 0.81) / ar09.size)

    def test_lag_zero(self, iid):
        assert autocorrelation(iid[:100], [0, 3])[0] == 1.0

    def test_errors(self):
        with pytest.raises(DegenerateTraceError):
            autocorrelation(np.ones(10), [1])
        with pytest.raises(InvalidParameterError):
            autocorrelation(np.arange(3.0), [3])


class TestBatchMeans:
    def test_iid(self, iid):
        mean, se, batches, degenerate = batch_means_se(iid)
        assert batches == 1000 and not degenerate
        assert se == pytest.approx(1 / math.sqrt(iid.size), rel=0.2)

    def test_ar1_inflation(self, ar09):
        se = batch_means_se(ar09).se
        expected = math.sqrt((1 + 0.9) / (1 - 0.9)) / math.sqrt(ar09.size)
        assert se == pytest.approx(expected, rel=0.2)

    def test_constant(self):
        res = batch_means_se(np.full(100, 2.0))
        assert res.se == 0.0 and res.degenerate

    def test_too_few(self):
        with pytest.raises(InvalidParameterError):
            batch_means_se(np.arange(10.0), batches=6)


class TestEss:
    def test_iid(self, iid):
        assert effective_sample_size(iid) == pytest.approx(iid.size, rel=0.1)

    def test_ar1(self, ar09):
        assert effective_sample_size(ar09) == pytest.approx(ar09.size / 19, rel=0.2)

    def test_single(self):
        assert effective_sample_size(np.array([3.0])) == 1.0

    def test_bounded_by_n(self):
        x = np.tile([1.0, -1.0], 500)
        assert effective_sample_size(x) <= x.size


class TestReports:
    def test_compare_orders(self, iid, ar09):
        rep = compare_kernels({"iid": iid[:200_000], "ar": ar09[:200_000]})
        rows = {r.name: r for r in rep.rows}
        assert rows["iid"].ess > rows["ar"].ess
        flags = {(c["kernel"], c["versus"]): c["flag"] for c in rep.comparisons}
        assert flags[("iid", "ar")] == "lower" and flags[("ar", "iid")] == "higher"

    def test_identical_rows(self, ar09):
        rep = compare_kernels({"a": ar09[:10_000], "b": ar09[:10_000].copy()})
        a, b = rep.rows
        assert (a.mean, a.se, a.ess, a.acf1) == (b.mean, b.se, b.ess, b.acf1)

    def test_unequal_lengths(self, iid):
        with pytest.raises(InvalidParameterError):
            compare_kernels({"a": iid[:10], "b": iid[:11]})

    def test_diagnose_invariants(self, ar09):
        rep = diagnose(np.column_stack([ar09[:50_000], ar09[50_000:100_000] ** 2]), ["x", "x2"], lags=(1, 2))
        for row in rep.rows:
            assert row.ess <= rep.n and row.se > 0
        assert rep.to_csv_rows()[0][:2] == ["functional", "mean"]
