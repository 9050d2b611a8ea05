"""Shared fixtures and the acceptance-suite result reporter."""

import pytest

from labbook.clock import FixedClock
from labbook.session.engine import Session
from labbook.session.snapshot import EMPTY_PNG, default_camera

ACCEPTANCE_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): names the acceptance criterion a test checks"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        name = marker.args[0]
        ACCEPTANCE_RESULTS[name] = report.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in ACCEPTANCE_RESULTS.items():
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")


# -- event helpers ---------------------------------------------------------


def marker_event(p, label="marker", camera=None, screenshot=EMPTY_PNG):
    return {
        "action": "add",
        "measurement": {"kind": "location_marker", "p": list(p), "label": label},
        "camera": camera or default_camera(),
        "screenshot": screenshot,
    }


def distance_event(a, b, camera=None, screenshot=EMPTY_PNG):
    length = sum((x - y) ** 2 for x, y in zip(a, b)) ** 0.5
    return {
        "action": "add",
        "measurement": {"kind": "distance", "a": list(a), "b": list(b), "length_m": length},
        "camera": camera or default_camera(),
        "screenshot": screenshot,
    }


def remove_event(mid, camera=None, screenshot=EMPTY_PNG):
    return {
        "action": "remove",
        "id": mid,
        "camera": camera or default_camera(),
        "screenshot": screenshot,
    }


def bookmark_event(camera=None, screenshot=EMPTY_PNG):
    return {
        "action": "bookmark",
        "camera": camera or default_camera(),
        "screenshot": screenshot,
    }


@pytest.fixture
def session(tmp_path):
    return Session.start(tmp_path / "repo", clock=FixedClock())


@pytest.fixture
def repo(session):
    return session.repo
