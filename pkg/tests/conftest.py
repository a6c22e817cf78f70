import numpy as np
import pytest

from stopgo.netmodel import GridGeometry, generate_grid


@pytest.fixture(scope="session")
def net_1u():
    return generate_grid(1, 0, GridGeometry(rows=1, cols=1))


@pytest.fixture(scope="session")
def net_1s():
    return generate_grid(0, 1, GridGeometry(rows=1, cols=1))


@pytest.fixture(scope="session")
def net_2u():
    return generate_grid(2, 0, GridGeometry(rows=1, cols=2))


@pytest.fixture(scope="session")
def net_grid14():
    return generate_grid(14, 0, GridGeometry(rows=2, cols=7))


@pytest.fixture
def rng():
    return np.random.default_rng(0)
