import numpy as np
import pytest

from mqpsh.models.grid import BoxGrid
from mqpsh.services.catalog_service import catalog_service
from mqpsh.services.field_service import field_service


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def line_grid():
    """C^1 as a 21 x 21 grid on [-1, 1]^2."""
    return BoxGrid.cube(1, 1.0, 21)


@pytest.fixture
def agreement_grid():
    """C^2 with 9 nodes per real axis on [-1, 1]^4."""
    return BoxGrid.cube(2, 1.0, 9)


@pytest.fixture
def sample():
    def build(name, grid, **params):
        fn = catalog_service.build(name, params)
        return field_service.sample(fn, grid), fn
    return build
