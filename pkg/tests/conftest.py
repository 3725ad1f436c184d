import pytest

_LOG_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one pass/fail line per acceptance criterion."""
    log = request.config.stash.setdefault(_LOG_KEY, [])

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
        log.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_LOG_KEY, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(log):
            terminalreporter.write_line(line)
