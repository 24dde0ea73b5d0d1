import math

import numpy as np
import pytest

from symreeb import systems


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config._criteria = {}


def pytest_collection_modifyitems(config, items):
    # run the acceptance criteria in numerical order
    def key(item):
        mark = item.get_closest_marker("criterion")
        return mark.args[0] if mark else 0
    items.sort(key=key)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    store = item.config._criteria
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else ("SKIP" if report.skipped else "FAIL")
        store[n] = (status, detail or item.name)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = getattr(config, "_criteria", {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(store):
        status, detail = store[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")


@pytest.fixture(scope="session")
def golden_ellipsoid():
    return systems.ellipsoid(1.0, (1 + math.sqrt(5)) / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
