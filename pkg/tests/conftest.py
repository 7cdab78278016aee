import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tfpainleve.config import SolverConfig  # noqa: E402
from tfpainleve.coupled import iterate_coupled  # noqa: E402
from tfpainleve.painleve import solve_hastings_mcleod  # noqa: E402

EPS = 0.0067


@pytest.fixture(scope="session")
def hm_default():
    return solve_hastings_mcleod()


_states = {}


def coupled_state(eps=EPS, eta=None, **cfg):
    """Cached coupled run; eta defaults to eps."""
    eta = eps if eta is None else eta
    key = (eps, eta, tuple(sorted(cfg.items())))
    if key not in _states:
        _states[key] = iterate_coupled(eps, eta, SolverConfig(**cfg))
    return _states[key]


@pytest.fixture(scope="session")
def coupled():
    return coupled_state


# acceptance report ------------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion sub-check")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marks = getattr(report, "criterion", None)
    if marks is None:
        return
    n, title = marks
    entry = _criteria.setdefault(n, {"title": title, "failed": [], "passed": 0})
    if report.passed:
        entry["passed"] += 1
    else:
        entry["failed"].append(report.nodeid.split("::")[-1])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (m.args[0], m.args[1] if len(m.args) > 1 else "")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        status = "PASS" if not e["failed"] else "FAIL"
        line = f"criterion {n}: {status}  {e['title']}"
        if e["failed"]:
            line += f"  (failed: {', '.join(e['failed'])})"
        tr.write_line(line)
