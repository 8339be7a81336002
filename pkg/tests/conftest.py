from pathlib import Path

import pytest

from app.services.algebra_service import DEFAULT_ALGEBRAS
from app.services.program_service import check_source

FIXTURES = Path(__file__).parent / "fixtures"


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


@pytest.fixture
def algebras():
    return DEFAULT_ALGEBRAS


@pytest.fixture
def courier_source():
    return read_fixture("courier.pi")


@pytest.fixture
def courier(courier_source):
    return check_source(courier_source)


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / name


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size property runs, deselect with -m 'not slow'")
