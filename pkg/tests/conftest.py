import pytest
from hypothesis import settings

settings.register_profile("wkbdet", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("wkbdet")

_LINES = []


@pytest.fixture
def acceptance(capsys):
    """Record one PASS/FAIL line per acceptance criterion."""
    def report(number, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
