import pytest

from swiftpricing.models import HestonParams, heston_cf

SHORT = HestonParams(kappa=4.0, theta=0.25, sigma=1.0, rho=-0.5, v0=0.01)
SHORT_T = 0.01

_criterion_of = {}
_outcome = {}


@pytest.fixture(scope="session")
def short_cf():
    return heston_cf(SHORT, SHORT_T)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _criterion_of[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    n = _criterion_of.get(report.nodeid)
    if n is None or not (report.when == "call" or report.failed):
        return
    _outcome[n] = _outcome.get(n, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcome):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _outcome[n] else 'FAIL'}")
