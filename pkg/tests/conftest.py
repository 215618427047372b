import pytest

from ballistic1d import build_profile, derive_material
from ballistic1d.potential import DoubleBarrier, Rtd, SingleBarrier, Step

_criteria = {}
_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed:
        _outcomes[report.nodeid] = "FAIL"
    else:
        _outcomes.setdefault(report.nodeid, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    titles, statuses = {}, {}
    for nodeid, (n, title) in _criteria.items():
        titles[n] = title
        statuses.setdefault(n, set()).add(_outcomes.get(nodeid, "NOT RUN"))
    terminalreporter.section("acceptance criteria")
    for n in sorted(titles):
        seen = statuses[n]
        status = "FAIL" if "FAIL" in seen else ("NOT RUN" if "NOT RUN" in seen else "PASS")
        terminalreporter.write_line(f"criterion {n:2d} {status:7s} {titles[n]}")


@pytest.fixture(scope="session")
def mat():
    return derive_material()


@pytest.fixture(scope="session")
def step_profiles():
    return {v: build_profile(Step(v_l=v)) for v in (-0.1, 0.3)}


@pytest.fixture(scope="session")
def single_barrier():
    return build_profile(SingleBarrier())


@pytest.fixture(scope="session")
def double_barrier():
    return build_profile(DoubleBarrier())


@pytest.fixture(scope="session")
def rtd():
    return build_profile(Rtd(v_l=0.1))
