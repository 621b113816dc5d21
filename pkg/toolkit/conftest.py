from pathlib import Path

import pytest

import hlattice
from config import DEFAULT_PRECISION_BITS, configure_precision

LATTICE_DIR = Path(__file__).parent / 'lattices'


@pytest.fixture(autouse=True)
def precision():
    configure_precision(DEFAULT_PRECISION_BITS)
    yield
    configure_precision(DEFAULT_PRECISION_BITS)


@pytest.fixture
def lattice_dir() -> Path:
    return LATTICE_DIR


@pytest.fixture
def w1() -> hlattice.HurwitzLattice:
    return hlattice.standard_lattice(1)


@pytest.fixture
def w2() -> hlattice.HurwitzLattice:
    return hlattice.standard_lattice(2)


@pytest.fixture
def diagonal() -> hlattice.HurwitzLattice:
    return hlattice.load(LATTICE_DIR / 'diagonal_1_2.json')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-size statistical runs (deselect with -m "not slow")')
