import json
from collections import defaultdict

import pytest

from multiassign.fixtures import NAMES, load_fixture

_criteria = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


def pytest_runtest_logreport(report):
    marks = getattr(report, "criteria", None)
    if not marks:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        for n in marks:
            _criteria[n].append((report.nodeid, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criteria = [m.args[0] for m in item.iter_markers("criterion")]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        results = _criteria[n]
        failed = [nid.split("::")[-1] for nid, outcome in results if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {n:>2}: {status} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixtures():
    return {name: load_fixture(name) for name in NAMES}


@pytest.fixture
def write_json(tmp_path):
    def write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return path
    return write
