import numpy as np
import pytest

from itolab.models import model_preset
from itolab.simulate import simulate, uniform_grid


@pytest.fixture(scope="session")
def bm():
    return model_preset("bm")


@pytest.fixture(scope="session")
def bm_ensemble(bm):
    # shared mid-size Brownian ensemble for statistics tests
    grid = uniform_grid(1 << 13, 1.0)
    return simulate(bm, grid, 20240811, 64)


@pytest.fixture(scope="session")
def bm_path(bm_ensemble):
    return bm_ensemble.path(0)
