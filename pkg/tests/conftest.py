import math

import pytest

from qwalk import InitialState

DEFAULT_INITIAL = InitialState(varphi=math.pi / 4, delta=math.pi / 2, start=0)

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def default_initial():
    return DEFAULT_INITIAL


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary is printed at session end."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}  {detail}")
