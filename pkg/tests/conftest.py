import numpy as np
import pytest

from bozklab import Field, make_grid


@pytest.fixture
def grid_2pi():
    return make_grid(64, 64, 2 * np.pi, 2 * np.pi)


@pytest.fixture
def grid_box():
    return make_grid(64, 64, 20.0, 20.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(grid, rng, kmax=8):
    """Band-limited random real field (shared helper)."""
    noise = rng.standard_normal((grid.nx, grid.ny))
    kx, ky = grid.index_mesh()
    mask = (np.abs(kx) <= kmax) & (np.abs(ky) <= kmax)
    values = np.fft.ifft2(np.fft.fft2(noise) * mask).real
    return Field.from_values(grid, values)
