import numpy as np
import pytest

from qcmap.grid import build_grid


@pytest.fixture
def grid():
    return build_grid(1024, 25.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)
