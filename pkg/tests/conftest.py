import numpy as np
import pytest

from taxiscade.config import default_config
from taxiscade.grid import FieldIC, GridSpec, build_initial_state


@pytest.fixture
def small_grid() -> GridSpec:
    return GridSpec(nx=16, ny=12, dx=1.0, dy=1.0)


@pytest.fixture
def square_grid() -> GridSpec:
    return GridSpec(nx=20, ny=20, dx=0.5, dy=0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def default_cfg():
    return default_config()


def bumpy_state(grid: GridSpec):
    """Smooth positive state with nonuniform fields on any grid."""
    ics = {
        "u": FieldIC("gaussian", {"amplitude": 1.0,
                                  "center_x": 0.6 * grid.length_x,
                                  "center_y": 0.4 * grid.length_y,
                                  "width": 0.2 * grid.length_x}),
        "v": FieldIC("uniform", {"level": 0.5}),
        "w": FieldIC("uniform", {"level": 1.0}),
        "z": FieldIC("gaussian", {"amplitude": 0.8,
                                  "center_x": 0.3 * grid.length_x,
                                  "center_y": 0.7 * grid.length_y,
                                  "width": 0.25 * grid.length_x}),
    }
    return build_initial_state(grid, ics)
