import pytest

CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[CRITERIA] = []


@pytest.fixture
def report(request):
    """Record one acceptance line; printed again in the terminal summary."""
    lines = request.config.stash[CRITERIA]

    def _report(number, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append((number, line))
        return ok

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[CRITERIA]
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
