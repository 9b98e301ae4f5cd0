import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one acceptance line; ``check(name, ok, detail)`` then asserts ``ok``."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def check(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
