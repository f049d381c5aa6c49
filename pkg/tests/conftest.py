import numpy as np
import pytest

from pmspaces import catalog


@pytest.fixture
def p4():
    """Exact unit path v1-v2-v3-v4 with omega = {v1, v2, v3}."""
    return catalog.path_graph(4, exact=True)


@pytest.fixture
def p4_float():
    return catalog.path_graph(4, exact=False)


def mask(space, *labels):
    return space.mask(list(labels))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        num = int(name.split("_")[2])
        _criteria[num] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if _criteria[num] else 'FAIL'}")
