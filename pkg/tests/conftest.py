import pytest


def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture
def report(request):
    """Record the one-line verdict for an acceptance criterion."""

    def put(number: int, passed: bool, detail: str = ""):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        request.config._acceptance_lines[number] = line
        print(line)
        return passed

    return put


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
