import pytest

from nullcontact.regions import ellipsoid, make_revolution

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ball():
    return make_revolution(ellipsoid(1.0, 1.0))


@pytest.fixture(scope="session")
def ellipsoid12():
    return make_revolution(ellipsoid(1.0, 2.0))
