import os

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def toy_states():
    return os.path.join(FIXTURES, "toy_states")


@pytest.fixture
def toy_national():
    return os.path.join(FIXTURES, "toy_national")


@pytest.fixture
def gazetteer_csv():
    return os.path.join(FIXTURES, "gazetteer.csv")


# one PASS/FAIL line per acceptance criterion, shown at the end of the run
_CRITERIA: dict = {}


@pytest.fixture
def criterion(request):
    def record(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _CRITERIA[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
