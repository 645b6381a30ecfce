import numpy as np
import pytest

from twinbeam.config import from_dict
from twinbeam.sweep import basis_from_config


@pytest.fixture(scope="session")
def default_cfg():
    return from_dict({})


@pytest.fixture(scope="session")
def default_basis(default_cfg):
    return basis_from_config(default_cfg)


@pytest.fixture(scope="session")
def small_cfg():
    """Reduced mode counts and grids for fast interference tests."""
    return from_dict({
        "schmidt": {"n_q": 6, "n_m": 3, "n_l": 2, "mu_spectral": 0.9},
        "grids": {"n_omega": 161, "n_time": 1024},
        "power_sweep": {"n_points": 5},
    })


@pytest.fixture(scope="session")
def small_basis(small_cfg):
    return basis_from_config(small_cfg)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
