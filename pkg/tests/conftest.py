import re
from collections import OrderedDict

import pytest

_CRITERIA = OrderedDict()
_TITLES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            num, title = mark.args
            _TITLES[num] = title
            _CRITERIA.setdefault(num, [])


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    m = re.search(r"test_c(\d+)_", report.nodeid)
    if m and "test_acceptance" in report.nodeid:
        _CRITERIA.setdefault(int(m.group(1)), []).append((report.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        results = _CRITERIA[num]
        if not results:
            continue
        status = "PASS" if all(ok for _, ok in results) else "FAIL"
        failed = [nid.split("::")[-1] for nid, ok in results if not ok]
        extra = f"  (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {num}: {status}  {_TITLES.get(num, '')}{extra}")
