"""Test configuration and fixtures."""
import numpy as np
import pytest

from src.model.constants import derive_constants
from src.schemas.params import DerivedConstants, ModelParams, RandomSmooth, RunSettings
from src.spectral.grid import Grid
from src.spectral.initial_data import make_initial_data


@pytest.fixture
def params() -> ModelParams:
    """Default model parameters."""
    return ModelParams()


@pytest.fixture
def constants(params) -> DerivedConstants:
    """γ and λ of the default parameters."""
    return derive_constants(params)


@pytest.fixture
def unit_constants() -> DerivedConstants:
    """γ = λ = 1."""
    return DerivedConstants(gamma=1.0, lam=1.0)


@pytest.fixture
def small_grid() -> Grid:
    """32³ grid with unit spacing."""
    return Grid(n=32, box_length=32.0)


@pytest.fixture
def tiny_grid() -> Grid:
    """8³ grid on a box of side 2π."""
    return Grid(n=8, box_length=2.0 * np.pi)


@pytest.fixture
def smooth_recipe() -> RandomSmooth:
    """Well-resolved random data for the 32³ grid, small enough for the floors."""
    return RandomSmooth(amplitude=1e-3, decay_rate=4.0, window_fraction=0.1)


@pytest.fixture
def random_state(small_grid, smooth_recipe):
    """Seeded smooth perturbation on the 32³ grid."""
    return make_initial_data(small_grid, smooth_recipe, seed=7)


@pytest.fixture
def linear_settings() -> RunSettings:
    """Short linear run."""
    return RunSettings(dt=0.25, t_end=2.0, nonlinear=False)


@pytest.fixture
def nonlinear_settings() -> RunSettings:
    """Short nonlinear run."""
    return RunSettings(dt=0.1, t_end=1.0, nonlinear=True)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240101)
