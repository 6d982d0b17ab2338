import pytest

from finslerflow.anisotropy import Anisotropy


@pytest.fixture(scope="session")
def euclid():
    return Anisotropy.euclidean()


@pytest.fixture(scope="session")
def quad():
    return Anisotropy.quadratic(4.0, 1.0)


@pytest.fixture(scope="session")
def fourier():
    return Anisotropy.fourier(1.0, [(4, 0.05, 0.0)])


@pytest.fixture(scope="session")
def all_anisotropies(euclid, quad, fourier):
    return [euclid, quad, fourier]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
