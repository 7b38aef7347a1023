import pytest

from qcrsim import CouplingSpec, JunctionSpec, SystemSpec, TransmonSpec


@pytest.fixture(scope="session")
def system():
    return SystemSpec()


@pytest.fixture(scope="session")
def junction():
    return JunctionSpec()


@pytest.fixture(scope="session")
def coupling():
    return CouplingSpec()


@pytest.fixture(scope="session")
def transmon():
    return TransmonSpec()
