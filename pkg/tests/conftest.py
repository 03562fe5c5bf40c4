import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    # Record once per test: on call, or on a failed/skipped setup.
    if report.when != "call" and not (report.when == "setup" and not report.passed):
        return
    number = marker.kwargs.get("number", 0)
    title = marker.kwargs.get("title", item.name)
    if report.passed:
        status = "PASS"
    elif report.skipped:
        status = "SKIP"
    else:
        status = "FAIL"
    lines = getattr(item.config, "_acceptance_lines", None)
    if lines is None:
        lines = item.config._acceptance_lines = []
    lines.append((number, f"{status}  criterion {number:2d}: {title}"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
