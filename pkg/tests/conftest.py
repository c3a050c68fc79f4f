from collections import defaultdict

import pytest

_CRITERIA = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        ok = rep.outcome == "passed" and not hasattr(rep, "wasxfail")
        _CRITERIA[marker.args[0]].append((item.name, ok, item.obj.__doc__ or ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        results = _CRITERIA[n]
        failed = [name for name, ok, _ in results if not ok]
        status = "PASS" if not failed else "FAIL"
        detail = f"{len(results) - len(failed)}/{len(results)} checks"
        if failed:
            detail += "; not met: " + ", ".join(failed)
        terminalreporter.write_line(f"criterion {n:2d}: {status} ({detail})")
