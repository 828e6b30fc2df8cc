import pytest

_LINES: dict[str, str] = {}


@pytest.fixture
def criterion():
    """``criterion(name, ok, detail)`` records one acceptance line and returns ``ok``."""

    def record(name: str, ok: bool, detail: str) -> bool:
        _LINES[name] = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
        print(_LINES[name])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_LINES, key=lambda n: int(n[2:])):
        terminalreporter.write_line(_LINES[name])
