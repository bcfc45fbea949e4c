"""Unit tests for turbulence sources and forcing terms."""
import numpy as np
import pytest

from src.core.exceptions import InvalidParametersError, StateValidityError
from src.model.state import PerturbationState
from src.schemas.params import ModelParams
from src.nonlinear.rhs import (
    NonlinearForcing,
    forcing_from_derivatives,
    linear_tendency,
    rhs,
    time_derivative,
)
from src.nonlinear.sources import SpatialDerivatives, turbulence_sources
from src.spectral.grid import Grid


def _state(grid, a=0.0, v=(0.0, 0.0, 0.0), h=0.0, m=0.0, eps=0.0) -> PerturbationState:
    shape = grid.real_shape
    return PerturbationState.from_components(
        grid,
        np.broadcast_to(a, shape),
        np.stack([np.broadcast_to(c, shape) for c in v]),
        np.broadcast_to(h, shape),
        np.broadcast_to(m, shape),
        np.broadcast_to(eps, shape),
    )


def _smooth_state(grid: Grid, delta: float) -> PerturbationState:
    """Single-wavenumber fields on a box of side 2π."""
    x1, x2, x3 = grid.coordinates
    return _state(
        grid,
        a=delta * np.sin(x1) * np.cos(x2),
        v=(delta * np.sin(x1) * np.cos(x3), delta * np.cos(x2), delta * np.sin(x3) * np.sin(x1)),
        h=delta * np.cos(x1) * np.sin(x2),
        m=delta * np.sin(x3),
        eps=delta * np.cos(x1) * np.cos(x3),
    )


def _central(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2.0 * h)


def _gradient(f: np.ndarray, h: float) -> np.ndarray:
    return np.stack([_central(f, axis, h) for axis in (-3, -2, -1)])


def _laplacian(f: np.ndarray, h: float) -> np.ndarray:
    return sum(np.roll(f, -1, axis) - 2.0 * f + np.roll(f, 1, axis) for axis in (-3, -2, -1)) / h**2


def _finite_differences(state: PerturbationState) -> SpatialDerivatives:
    """Second-order centered stencils in place of spectral derivatives."""
    h = state.grid.spacing
    v = state.v
    grad_v = np.stack([_gradient(v[i], h) for i in range(3)])
    return SpatialDerivatives(
        a=state.a,
        v=v,
        h=state.h,
        m=state.m,
        eps=state.eps,
        grad_a=_gradient(state.a, h),
        grad_h=_gradient(state.h, h),
        grad_m=_gradient(state.m, h),
        grad_eps=_gradient(state.eps, h),
        grad_v=grad_v,
        lap_v=_laplacian(v, h),
        grad_div_v=_gradient(grad_v[0, 0] + grad_v[1, 1] + grad_v[2, 2], h),
        lap_h=_laplacian(state.h, h),
        lap_m=_laplacian(state.m, h),
        lap_eps=_laplacian(state.eps, h),
    )


@pytest.mark.unit
def test_sources_vanish_at_equilibrium(small_grid, params, constants):
    """Test u ≡ 0 and ρ ≡ ρ̄ give S_k = G = 0."""
    s_k, g = turbulence_sources(PerturbationState.zeros(small_grid), params, constants)

    assert not np.any(s_k)
    assert not np.any(g)


@pytest.mark.unit
def test_sources_of_single_shear_mode(small_grid, params, constants):
    """Test u = (γλ sin(kx₂), 0, 0): S_k = μ(∂₂u₁)², G = μ_e(∂₂u₁)²."""
    k = 2 * np.pi / small_grid.box_length
    x2 = small_grid.coordinates[1]
    state = _state(small_grid, v=(np.sin(k * x2), 0.0, 0.0))

    s_k, g = turbulence_sources(state, params, constants)

    shear_sq = np.broadcast_to((constants.gamma_lambda * k * np.cos(k * x2)) ** 2, small_grid.real_shape)
    np.testing.assert_allclose(s_k, params.mu * shear_sq, atol=1e-12)
    np.testing.assert_allclose(g, params.mu_e * shear_sq, atol=1e-12)


@pytest.mark.unit
def test_sources_of_density_ripple(small_grid, params, constants):
    """Test ρ = ρ̄ + δ sin(kx₁), u ≡ 0: only the pressure-gradient term survives."""
    k = 2 * np.pi / small_grid.box_length
    x1 = small_grid.coordinates[0]
    delta = 0.01
    state = _state(small_grid, a=delta * np.sin(k * x1))

    s_k, g = turbulence_sources(state, params, constants)

    rho = np.broadcast_to(params.rho_bar + delta * np.sin(k * x1), small_grid.real_shape)
    grad_sq = np.broadcast_to((delta * k * np.cos(k * x1)) ** 2, small_grid.real_shape)
    expected = params.mu_t / rho**2 * params.pressure.derivative(rho) * grad_sq
    np.testing.assert_allclose(s_k, expected, rtol=1e-9, atol=1e-16)
    np.testing.assert_allclose(g, 0.0, atol=1e-16)


@pytest.mark.unit
def test_rhs_of_zero_state_is_exactly_zero(small_grid, params, constants):
    """Test the equilibrium is a fixed point of F."""
    tendency = rhs(PerturbationState.zeros(small_grid), params, constants)

    assert not np.any(tendency.data)
    assert not np.any(linear_tendency(PerturbationState.zeros(small_grid), constants).data)


@pytest.mark.unit
def test_mass_flux_of_density_ripple(small_grid, params, constants):
    """Test a = δ sin(kx₁), v = (1, 0, 0): F₁ = −γλδk cos(kx₁)."""
    k = 2 * np.pi / small_grid.box_length
    x1 = small_grid.coordinates[0]
    delta = 0.01
    state = _state(small_grid, a=delta * np.sin(k * x1), v=(1.0, 0.0, 0.0))

    tendency = rhs(state, params, constants)

    expected = np.broadcast_to(
        -constants.gamma_lambda * delta * k * np.cos(k * x1), small_grid.real_shape
    )
    np.testing.assert_allclose(tendency.a, expected, atol=1e-13)


@pytest.mark.unit
def test_constant_turbulent_energy_has_no_forcing(small_grid, params, constants):
    """Test a spatially constant m gives F = 0."""
    tendency = rhs(_state(small_grid, m=0.05), params, constants)

    assert np.abs(tendency.data).max() < 1e-12


@pytest.mark.unit
def test_mass_flux_has_zero_mean(random_state, params, constants):
    """Test the mean of F₁ vanishes."""
    coeffs = NonlinearForcing(random_state.grid, params, constants)(random_state.spectral())

    assert coeffs[0, 0, 0, 0] == 0
    tendency = rhs(random_state, params, constants)
    assert abs(tendency.a.mean()) <= 1e-12 * np.abs(tendency.a).max()


@pytest.mark.unit
def test_forcing_is_dealiased(random_state, params, constants):
    """Test F has no energy outside the 2/3 band."""
    grid = random_state.grid
    coeffs = NonlinearForcing(grid, params, constants)(random_state.spectral())

    assert not np.any(coeffs[:, ~grid.dealias_mask])


@pytest.mark.unit
def test_density_floor_breach(small_grid, params, constants):
    """Test ρ below its floor raises with the offending grid point."""
    a = np.zeros(small_grid.real_shape)
    a[3, 4, 5] = -0.95 * params.rho_bar
    state = PerturbationState.from_components(
        small_grid, a, np.zeros((3,) + small_grid.real_shape), *(np.zeros(small_grid.real_shape),) * 3
    )

    with pytest.raises(StateValidityError) as excinfo:
        rhs(state, params, constants)

    assert excinfo.value.field == "rho"
    assert excinfo.value.index == (3, 4, 5)
    assert excinfo.value.position == small_grid.position((3, 4, 5))


@pytest.mark.unit
def test_turbulent_energy_floor_breach(small_grid, params, constants):
    """Test k below its floor raises."""
    with pytest.raises(StateValidityError) as excinfo:
        rhs(_state(small_grid, m=-0.95 * params.k_bar), params, constants)

    assert excinfo.value.field == "k"


@pytest.mark.unit
def test_non_positive_k_bar_is_rejected(small_grid, constants):
    """Test k̄ ≤ 0 cannot drive the forcing."""
    with pytest.raises(InvalidParametersError):
        rhs(PerturbationState.zeros(small_grid), ModelParams(k_bar=0.0), constants)


@pytest.mark.unit
def test_time_derivative_is_linear_plus_forcing(random_state, params, constants):
    """Test ∂_t W = A·W + F(W)."""
    total = time_derivative(random_state, params, constants).data
    parts = linear_tendency(random_state, constants).data + rhs(random_state, params, constants).data

    np.testing.assert_allclose(total, parts, atol=1e-13 * np.abs(total).max())


@pytest.mark.unit
def test_mass_flux_is_quadratic(random_state, params, constants):
    """Test ‖F₁(sW)‖₂ shrinks by 4 each time s halves over s ∈ {1, 1/2, 1/4}."""
    grid = random_state.grid
    forcing = NonlinearForcing(grid, params, constants)
    sizes = [
        np.sqrt(grid.spectral_l2_squared(forcing(random_state.scaled(s).spectral())[0]))
        for s in (1.0, 0.5, 0.25)
    ]

    assert sizes[0] > 0
    assert sizes[0] / sizes[1] == pytest.approx(4.0, rel=1e-10)
    assert sizes[1] / sizes[2] == pytest.approx(4.0, rel=1e-10)
    assert np.log2(sizes[1] / sizes[2]) == pytest.approx(2.0, abs=1e-9)


@pytest.mark.unit
def test_forcing_matches_centered_differences(params, constants):
    """Test F against second-order stencils: the gap shrinks by 4 when h halves."""
    errors = []
    for n in (16, 32):
        grid = Grid(n=n, box_length=2.0 * np.pi)
        state = _smooth_state(grid, 1e-3)

        spectral = rhs(state, params, constants).data
        stencil = forcing_from_derivatives(_finite_differences(state), params, constants)

        errors.append(np.abs(stencil - spectral).max() / np.abs(spectral).max())

    assert errors[0] < 0.05
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.1)
