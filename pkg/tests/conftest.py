import os
import sys
from collections import OrderedDict

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_acceptance = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    cid, title = mark.args
    ok = rep.passed
    detail = getattr(item, "acceptance_detail", "")
    if not ok and call.excinfo is not None:
        detail = str(call.excinfo.value).splitlines()[0] if str(call.excinfo.value) else call.excinfo.typename
    _acceptance.setdefault(cid, []).append((title, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, parts in _acceptance.items():
        ok = all(p[1] for p in parts)
        tr.write_line(f"criterion {cid}: {'PASS' if ok else 'FAIL'}")
        for title, part_ok, detail in parts:
            tr.write_line(f"    {'pass' if part_ok else 'FAIL'}  {title}: {detail}")


@pytest.fixture
def detail(request):
    """Attach a one-line summary to the acceptance report of the running test."""
    def note(text):
        request.node.acceptance_detail = text
    return note
