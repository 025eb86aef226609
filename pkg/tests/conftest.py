import pytest

_LINES = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_log(request):
    """Per-session record of acceptance verdicts, printed in the terminal summary."""
    return request.config.stash.setdefault(_LINES, {})


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
