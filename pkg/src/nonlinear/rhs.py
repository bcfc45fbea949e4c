"""Forcing terms F₁…F₅ of the perturbation system and its linear part.

The perturbation system reads W_t = A·W + F(W), where A carries the acoustic
coupling, the viscous terms λΔv + λ∇div v and the heat terms λΔ(h, m, ε).
Products are formed pointwise in physical space, transformed, and dealiased.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.model.state import PerturbationState
from src.nonlinear.sources import (
    SpatialDerivatives,
    check_validity,
    sources_from_derivatives,
)
from src.schemas.params import DerivedConstants, ModelParams
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tendency:
    """(F₁, F₂, F₃, F₄, F₅) in the state layout, sampled on the grid."""

    grid: Grid
    data: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return self.data[0]

    @property
    def v(self) -> np.ndarray:
        return self.data[1:4]

    @property
    def h(self) -> np.ndarray:
        return self.data[4]

    @property
    def m(self) -> np.ndarray:
        return self.data[5]

    @property
    def eps(self) -> np.ndarray:
        return self.data[6]


def forcing_from_derivatives(
    d: SpatialDerivatives, params: ModelParams, constants: DerivedConstants
) -> np.ndarray:
    """F(W) sampled on the grid from pointwise fields and derivatives.

    F₁ is formed by the product rule −γλ(v·∇a + a div v).
    """
    gl = constants.gamma_lambda
    rho = d.a + params.rho_bar
    k = d.m + params.k_bar

    s_k, g = sources_from_derivatives(d, params, constants)
    inv_rho = 1.0 / rho
    inv_diff = inv_rho - 1.0 / params.rho_bar
    p_prime = params.pressure.derivative(rho)
    p_prime_bar = float(params.pressure.derivative(params.rho_bar))
    div_v = d.div_v

    pressure_factor = (
        p_prime * inv_rho
        - p_prime_bar / params.rho_bar
        + 2.0 * k / (3.0 * rho)
        - 2.0 * params.k_bar / (3.0 * params.rho_bar)
    )

    forcing = np.empty((7,) + d.a.shape)
    forcing[0] = -gl * (np.sum(d.v * d.grad_a, axis=0) + d.a * div_v)
    forcing[1:4] = (
        inv_diff * (d.lap_v + d.grad_div_v)
        - pressure_factor * d.grad_a / gl
        - 2.0 / (3.0 * gl) * d.grad_m
    )
    forcing[4] = (
        inv_diff * d.lap_h
        - gl * p_prime * div_v
        + s_k * inv_rho
        - gl * np.sum(d.v * d.grad_h, axis=0)
    )
    forcing[5] = (
        inv_diff * d.lap_m + g * inv_rho - d.eps - gl * np.sum(d.v * d.grad_m, axis=0)
    )
    forcing[6] = (
        inv_diff * d.lap_eps
        + params.c1 * g * d.eps * inv_rho / k
        - params.c2 * d.eps**2 / k
        - gl * np.sum(d.v * d.grad_eps, axis=0)
    )
    return forcing


class NonlinearForcing:
    """Evaluates F(W) on spectral states of one grid."""

    def __init__(
        self,
        grid: Grid,
        params: ModelParams,
        constants: DerivedConstants,
        floor_fraction: Optional[float] = None,
    ):
        self.grid = grid
        self.params = params
        self.constants = constants
        self.floor_fraction = floor_fraction
        self._ik = 1j * np.stack(np.broadcast_arrays(*grid.odd_wavevector))

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        """Spectral F(W) for spectral W, dealiased."""
        grid, params = self.grid, self.params
        d = SpatialDerivatives.from_spectral(grid, coeffs)
        check_validity(
            grid, d.a + params.rho_bar, d.m + params.k_bar, params, self.floor_fraction
        )

        out = grid.forward(forcing_from_derivatives(d, params, self.constants))
        # F₁ = −γλ div(a v) in divergence form, so its mean vanishes exactly
        flux = grid.forward(d.a * d.v)
        out[0] = -self.constants.gamma_lambda * np.sum(self._ik * flux, axis=0)
        return out * grid.dealias_mask


def linear_operator(
    grid: Grid, constants: DerivedConstants, coeffs: np.ndarray
) -> np.ndarray:
    """Spectral A·W."""
    ik = 1j * np.stack(np.broadcast_arrays(*grid.odd_wavevector))
    lap = -grid.k_squared
    gamma, lam = constants.gamma, constants.lam
    a_hat, v_hat = coeffs[0], coeffs[1:4]
    div_hat = np.sum(ik * v_hat, axis=0)

    out = np.empty_like(coeffs)
    out[0] = -gamma * div_hat
    out[1:4] = -gamma * ik * a_hat + lam * lap * v_hat + lam * ik * div_hat
    out[4:7] = lam * lap * coeffs[4:7]
    return out


def rhs(
    state: PerturbationState,
    params: ModelParams,
    constants: DerivedConstants,
    floor_fraction: Optional[float] = None,
) -> Tendency:
    """F(W) for a physical-space state."""
    forcing = NonlinearForcing(state.grid, params, constants, floor_fraction)
    coeffs = forcing(state.spectral())
    return Tendency(state.grid, state.grid.backward(coeffs))


def linear_tendency(state: PerturbationState, constants: DerivedConstants) -> Tendency:
    """A·W for a physical-space state."""
    coeffs = linear_operator(state.grid, constants, state.spectral())
    return Tendency(state.grid, state.grid.backward(coeffs))


def time_derivative(
    state: PerturbationState,
    params: ModelParams,
    constants: DerivedConstants,
    floor_fraction: Optional[float] = None,
) -> Tendency:
    """∂_t W = A·W + F(W)."""
    coeffs = state.spectral()
    forcing = NonlinearForcing(state.grid, params, constants, floor_fraction)
    total = linear_operator(state.grid, constants, coeffs) + forcing(coeffs)
    return Tendency(state.grid, state.grid.backward(total))
