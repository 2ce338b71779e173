import numpy as np
import pytest

from pnspace.grid import make_grid


@pytest.fixture
def line():
    return make_grid(1, [0, 1], 257)


@pytest.fixture
def square():
    return make_grid(2, [0, 1, 0, 1], 65)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
