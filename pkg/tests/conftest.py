import numpy as np
import pytest

from contraction_lab import Grid, make_wave_params


@pytest.fixture(scope="session")
def params():
    """Default lab wave: n_- = 2, q_- = 0, eps = 0.1, lam = 0.3."""
    return make_wave_params(2.0, 0.0, eps=0.1, lam=0.3)


@pytest.fixture(scope="session")
def small_params():
    """Weak shock used by the contraction-scale checks."""
    return make_wave_params(2.0, 0.0, eps=0.05, lam=0.25)


def lab_grid(params, num_cells=1024, half_width_factor=30.0):
    half = half_width_factor * params.nu * params.sigma / params.eps
    return Grid(-half, half, num_cells)


@pytest.fixture(scope="session")
def grid(params):
    return lab_grid(params)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
