import numpy as np
import pytest

from qdisk.dirac import DiracData
from qdisk.sequences import PowerLawFamily

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fam55():
    return PowerLawFamily(4, 3, 5.5)


@pytest.fixture(scope="session")
def data55(fam55):
    return DiracData.from_family(fam55)


@pytest.fixture(scope="session")
def data9():
    return DiracData.from_family(PowerLawFamily(4, 3, 9))


@pytest.fixture(scope="session")
def data10():
    return DiracData.from_family(PowerLawFamily(4, 3, 10))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
