import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record acceptance-check lines; they are printed after the run."""
    lines = request.config.stash.setdefault(_LINES, [])

    def emit(check):
        lines.append(check.line())
        print(check.line())

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance checks")
        for line in lines:
            terminalreporter.write_line(line)
