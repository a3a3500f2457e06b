from __future__ import annotations

from dataclasses import dataclass, field

import pytest

from archex import presets
from archex.evaluator import BenchmarkId
from archex.objective import RawMetrics


@dataclass
class TableEvaluator:
    """Evaluator backed by a python function; counts underlying calls."""

    fn: object
    calls: list = field(default_factory=list)

    def evaluate(self, config, benchmark):
        self.calls.append((config, benchmark.name))
        power, time = self.fn({k: float(v) for k, v in config.items()})
        return RawMetrics(power, time)


@pytest.fixture
def low_power_space():
    return presets.design_space(presets.LOW_POWER)


@pytest.fixture
def high_perf_space():
    return presets.design_space(presets.HIGH_PERFORMANCE)


@pytest.fixture
def bench():
    return BenchmarkId("x264")


# acceptance reporting: one PASS/FAIL line per criterion

_CRITERIA = pytest.StashKey[dict]()
_NOTES = pytest.StashKey[dict]()
_config_ref = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")
    config.stash[_CRITERIA] = {}
    config.stash[_NOTES] = {}


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            entry = config.stash[_CRITERIA].setdefault(number, {"title": title, "nodes": {}})
            entry["nodes"][item.nodeid] = None


def pytest_runtest_logreport(report):
    config = _config_ref.get("config")
    if config is None:
        return
    for entry in config.stash[_CRITERIA].values():
        if report.nodeid in entry["nodes"]:
            if report.failed:
                entry["nodes"][report.nodeid] = False
            elif report.when == "call" and entry["nodes"][report.nodeid] is None:
                entry["nodes"][report.nodeid] = report.passed



def pytest_sessionstart(session):
    _config_ref["config"] = session.config


@pytest.fixture
def criterion_note(request):
    """Attach a measured figure to the criterion line of the current test."""
    mark = request.node.get_closest_marker("criterion")
    notes = request.config.stash[_NOTES].setdefault(mark.args[0], [])
    return notes.append


def pytest_terminal_summary(terminalreporter, config):
    criteria = config.stash[_CRITERIA]
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(criteria):
        entry = criteria[number]
        states = list(entry["nodes"].values())
        if any(s is False for s in states):
            verdict = "FAIL"
        elif states and all(s is True for s in states):
            verdict = "PASS"
        else:
            verdict = "NOT RUN"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {entry['title']}")
        for note in config.stash[_NOTES].get(number, []):
            terminalreporter.write_line(f"    {note}")
