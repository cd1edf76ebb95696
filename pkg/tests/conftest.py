import numpy as np
import pytest

from warpgeo.examples import C1AlphaParams, DrawstringParams, build_c1alpha, build_drawstring
from warpgeo.metric_core import background_metric


@pytest.fixture(scope="session")
def g0():
    return background_metric()


@pytest.fixture(scope="session")
def drawstring3():
    return build_drawstring(DrawstringParams(A=3.0))


@pytest.fixture(scope="session")
def c1alpha_half():
    return build_c1alpha(C1AlphaParams(0.5, 2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------- acceptance report
# Tests marked ``criterion(n, label)`` are tallied and summarised as one line
# per criterion at the end of the run.

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, label): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        if hasattr(rep, "wasxfail"):
            status = "xfail" if rep.skipped else "xpass"
        else:
            status = {"passed": "pass", "failed": "fail", "skipped": "skip"}[rep.outcome]
        n, label = mark.args
        _OUTCOMES.setdefault(n, []).append((label, status))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        parts = _OUTCOMES[n]
        statuses = {s for _, s in parts}
        if statuses <= {"pass"}:
            verdict = "PASS"
        elif statuses <= {"pass", "xfail"}:
            verdict = "PASS (with documented strict xfail)"
        else:
            verdict = "FAIL"
        detail = "; ".join(f"{label}: {s}" for label, s in parts)
        tr.write_line(f"criterion {n:2d}: {verdict:<36s} [{detail}]")
