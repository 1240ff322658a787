import numpy as np
import pytest

from potlab.fields import make_grid


@pytest.fixture
def grid2():
    return make_grid(2, 16.0, 48)


@pytest.fixture
def grid2_fine():
    return make_grid(2, 16.0, 64)


@pytest.fixture
def grid3():
    return make_grid(3, 12.0, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
