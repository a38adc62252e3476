import numpy as np
import pytest

from damcmc.rng import make_rng


@pytest.fixture
def rng():
    return make_rng(20240611)


def within_se(draws, target, k=3.0):
    """True when the sample mean of ``draws`` is within ``k`` standard errors of ``target``."""
    draws = np.asarray(draws, dtype=float)
    se = draws.std(ddof=1) / np.sqrt(draws.size)
    return abs(draws.mean() - target) <= k * se


def transition_counts(step, starts, n_states, rng):
    """One vectorized step from every entry of ``starts``; returns (counts, row totals)."""
    ends = step(starts, rng)
    counts = np.zeros((n_states, n_states))
    np.add.at(counts, (starts, ends), 1)
    return counts, counts.sum(axis=1)


def frequencies_match(counts, exact, k=3.0):
    """Every empirical transition frequency within ``k`` binomial SE of the exact matrix."""
    totals = counts.sum(axis=1, keepdims=True)
    freq = counts / np.maximum(totals, 1)
    se = np.sqrt(exact * (1 - exact) / np.maximum(totals, 1))
    return bool(np.all(np.abs(freq - exact) <= k * se + 1e-15)), float(np.max(np.abs(freq - exact) / np.maximum(se, 1e-300)))


_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "seconds": 0.0})
    entry["passed"] &= report.passed
    entry["seconds"] += report.duration


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        verdict = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {entry['title']} ({entry['seconds']:.2f} s)")
