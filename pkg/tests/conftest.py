import numpy as np
import pytest

from diracqca import make_mass

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion gate")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    ok = _CRITERIA.get(number, (text, True))[1]
    if rep.failed or rep.skipped:
        ok = False
    _CRITERIA[number] = (text, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(20140519)


@pytest.fixture(params=[0.1, 0.5, 0.6, 0.9])
def mass(request):
    return make_mass(request.param)
