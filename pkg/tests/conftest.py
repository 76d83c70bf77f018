import pytest

_criteria: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "call" or rep.failed:
        n, title = marker.args
        status, _, secs = _criteria.get(n, ("PASS", title, 0.0))
        if not rep.passed:
            status = "FAIL"
        _criteria[n] = (status, title, secs + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, title, secs = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title} ({secs:.2f}s)")
