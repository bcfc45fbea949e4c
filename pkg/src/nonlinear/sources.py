"""Pointwise ingredients of the forcing terms.

``SpatialDerivatives`` collects, in physical space, every derivative of the
perturbation fields the forcing needs; ``turbulence_sources`` turns them into
the production G and the source S_k of the k-equation with u = γλ·v,
ρ = a + ρ̄ and k = m + k̄.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.core.config import config
from src.core.exceptions import InvalidParametersError, StateValidityError
from src.model.state import PerturbationState
from src.schemas.params import DerivedConstants, ModelParams
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpatialDerivatives:
    """Fields and derivatives sampled on the grid.

    ``grad_v[i, j]`` holds ∂_j v_i.
    """

    a: np.ndarray
    v: np.ndarray
    h: np.ndarray
    m: np.ndarray
    eps: np.ndarray
    grad_a: np.ndarray
    grad_h: np.ndarray
    grad_m: np.ndarray
    grad_eps: np.ndarray
    grad_v: np.ndarray
    lap_v: np.ndarray
    grad_div_v: np.ndarray
    lap_h: np.ndarray
    lap_m: np.ndarray
    lap_eps: np.ndarray

    @property
    def div_v(self) -> np.ndarray:
        return self.grad_v[0, 0] + self.grad_v[1, 1] + self.grad_v[2, 2]

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs: np.ndarray) -> "SpatialDerivatives":
        ik = 1j * np.stack(np.broadcast_arrays(*grid.odd_wavevector))
        lap = -grid.k_squared

        def gradient(field_hat):
            return grid.backward(ik * field_hat)

        a_hat, v_hat = coeffs[0], coeffs[1:4]
        h_hat, m_hat, eps_hat = coeffs[4], coeffs[5], coeffs[6]
        div_hat = np.sum(ik * v_hat, axis=0)

        values = grid.backward(coeffs)
        grad_v = grid.backward(ik[None, :] * v_hat[:, None])
        laplacians = grid.backward(lap * coeffs[1:7])
        return cls(
            a=values[0],
            v=values[1:4],
            h=values[4],
            m=values[5],
            eps=values[6],
            grad_a=gradient(a_hat),
            grad_h=gradient(h_hat),
            grad_m=gradient(m_hat),
            grad_eps=gradient(eps_hat),
            grad_v=grad_v,
            lap_v=laplacians[0:3],
            grad_div_v=gradient(div_hat),
            lap_h=laplacians[3],
            lap_m=laplacians[4],
            lap_eps=laplacians[5],
        )


def check_validity(
    grid: Grid,
    rho: np.ndarray,
    k: np.ndarray,
    params: ModelParams,
    floor_fraction: Optional[float] = None,
) -> None:
    """Raise if ρ or k drops below its floor anywhere on the grid."""
    fraction = config.FLOOR_FRACTION if floor_fraction is None else floor_fraction
    if params.k_bar <= 0:
        raise InvalidParametersError(
            f"turbulent energy k_bar must be positive, got {params.k_bar}",
            k_bar=params.k_bar,
        )
    for name, values, reference in (("rho", rho, params.rho_bar), ("k", k, params.k_bar)):
        floor = fraction * reference
        index = np.unravel_index(int(np.argmin(values)), values.shape)
        lowest = float(values[index])
        if not lowest >= floor or not lowest > 0:
            raise StateValidityError(
                f"{name} fell to {lowest:.6e}, below its floor {floor:.6e}",
                field=name,
                index=tuple(int(i) for i in index),
                position=grid.position(index),
                value=lowest,
            )


def _strain_contraction(grad_u: np.ndarray) -> np.ndarray:
    """Σ_ij (∂_j u_i + ∂_i u_j)·∂_j u_i."""
    return np.einsum("ij...,ij...->...", grad_u + grad_u.swapaxes(0, 1), grad_u)


def sources_from_derivatives(
    derivatives: SpatialDerivatives, params: ModelParams, constants: DerivedConstants
) -> Tuple[np.ndarray, np.ndarray]:
    gl = constants.gamma_lambda
    rho = derivatives.a + params.rho_bar
    k = derivatives.m + params.k_bar

    grad_u = gl * derivatives.grad_v
    div_u = gl * derivatives.div_v
    contraction = _strain_contraction(grad_u)
    grad_rho_sq = np.sum(derivatives.grad_a**2, axis=0)

    s_k = (
        params.mu * contraction
        - (2.0 / 3.0) * params.mu * div_u**2
        + params.mu_t / rho**2 * params.pressure.derivative(rho) * grad_rho_sq
    )
    g = params.mu_e * contraction - (2.0 / 3.0) * (rho * k + params.mu_e * div_u) * div_u
    return s_k, g


def turbulence_sources(
    state: PerturbationState,
    params: ModelParams,
    constants: DerivedConstants,
    floor_fraction: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """(S_k, G) sampled on the state's grid."""
    grid = state.grid
    derivatives = SpatialDerivatives.from_spectral(grid, state.spectral())
    check_validity(
        grid,
        derivatives.a + params.rho_bar,
        derivatives.m + params.k_bar,
        params,
        floor_fraction,
    )
    return sources_from_derivatives(derivatives, params, constants)
