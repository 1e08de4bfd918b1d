import pytest

from su11readout import ConstraintSpec, PulseSpec, reference_system

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def params():
    return reference_system()


@pytest.fixture(scope="session")
def constraint():
    return ConstraintSpec()


@pytest.fixture(scope="session")
def pulse60():
    return PulseSpec.from_duration(60e-9)


@pytest.fixture(scope="session")
def pulse160():
    return PulseSpec.from_duration(160e-9)
