import numpy as np
import pytest

from unildpc.density import Grid

# A coarse grid keeps unit tests fast; acceptance checks use the defaults.
SMALL = Grid(20.0, 511)
MEDIUM = Grid(30.0, 1023)


@pytest.fixture
def small_grid():
    return SMALL


@pytest.fixture
def medium_grid():
    return MEDIUM


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- acceptance reporting -------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


def pytest_runtest_logreport(report):
    num = _CRITERIA.get(report.nodeid)
    if num is None:
        return
    n, title, state = num
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA[report.nodeid] = (n, title, "PASS" if report.passed else "FAIL")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERIA[item.nodeid] = (m.args[0], m.args[1], "NOT RUN")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, state in sorted(_CRITERIA.values()):
        terminalreporter.write_line(f"criterion {n}: {state}  {title}")
