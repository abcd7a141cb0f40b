import pytest

_VERDICTS: list[str] = []


class Verdicts:
    """Collects one pass/fail line per acceptance criterion."""

    def record(self, label: str, passed: bool, detail: str) -> bool:
        _VERDICTS.append(f"{label}: {'PASS' if passed else 'FAIL'} | {detail}")
        print(_VERDICTS[-1])
        return passed


@pytest.fixture(scope="session")
def verdicts():
    return Verdicts()


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[0][1:].rstrip(":ab"))):
            terminalreporter.write_line(line)
