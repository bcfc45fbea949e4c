"""Physical and perturbation states on a periodic grid.

Both states pack their seven scalar components into one array of shape
``(7, N, N, N)``; the physical order is (ρ, u₁, u₂, u₃, h, k, ε) and the
perturbation order is (a, v₁, v₂, v₃, h, m, ε).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.exceptions import ShapeError
from src.schemas.params import DerivedConstants, ModelParams
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)

COMPONENTS = 7
PERTURBATION_NAMES = ("a", "v1", "v2", "v3", "h", "m", "eps")
PHYSICAL_NAMES = ("rho", "u1", "u2", "u3", "h", "k", "eps")

# Component slots shared by both layouts
SCALAR = 0
VECTOR = slice(1, 4)
HEAT = 4
TURBULENT = 5
DISSIPATION = 6
# Fields evolved by the scalar heat semigroup
HEAT_FIELDS = slice(4, 7)


def _check_layout(grid: Grid, data: np.ndarray) -> None:
    expected = (COMPONENTS,) + grid.real_shape
    if data.shape != expected:
        raise ShapeError(
            f"state data must have shape {expected}, got {data.shape}",
            shape=list(data.shape),
        )


def _stack(grid: Grid, scalar, vector, heat, turbulent, dissipation) -> np.ndarray:
    parts = [np.asarray(scalar, dtype=float)]
    vector = np.asarray(vector, dtype=float)
    if vector.shape[:1] != (3,):
        raise ShapeError("vector field needs three components", shape=list(vector.shape))
    parts.extend(vector)
    parts.extend(np.asarray(f, dtype=float) for f in (heat, turbulent, dissipation))
    for part in parts:
        if part.shape != grid.real_shape:
            raise ShapeError(
                f"component shape {part.shape} does not match grid {grid.real_shape}",
                shape=list(part.shape),
            )
    return np.stack(parts)


@dataclass(frozen=True)
class PhysicalState:
    """(ρ, u, h, k, ε) sampled on ``grid``."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        _check_layout(self.grid, self.data)

    @classmethod
    def from_components(cls, grid: Grid, rho, u, h, k, eps) -> "PhysicalState":
        return cls(grid, _stack(grid, rho, u, h, k, eps))

    @classmethod
    def equilibrium(cls, grid: Grid, params: ModelParams) -> "PhysicalState":
        data = np.zeros((COMPONENTS,) + grid.real_shape)
        data[SCALAR] = params.rho_bar
        data[TURBULENT] = params.k_bar
        return cls(grid, data)

    @property
    def rho(self) -> np.ndarray:
        return self.data[SCALAR]

    @property
    def u(self) -> np.ndarray:
        return self.data[VECTOR]

    @property
    def h(self) -> np.ndarray:
        return self.data[HEAT]

    @property
    def k(self) -> np.ndarray:
        return self.data[TURBULENT]

    @property
    def eps(self) -> np.ndarray:
        return self.data[DISSIPATION]


@dataclass(frozen=True)
class PerturbationState:
    """(a, v, h, m, ε) sampled on ``grid`` at time ``t``."""

    grid: Grid
    data: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        _check_layout(self.grid, self.data)

    @classmethod
    def from_components(cls, grid: Grid, a, v, h, m, eps, t: float = 0.0):
        return cls(grid, _stack(grid, a, v, h, m, eps), t)

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "PerturbationState":
        return cls(grid, np.zeros((COMPONENTS,) + grid.real_shape), t)

    @classmethod
    def from_spectral(
        cls, grid: Grid, coeffs: np.ndarray, t: float = 0.0
    ) -> "PerturbationState":
        return cls(grid, grid.backward(coeffs), t)

    def spectral(self) -> np.ndarray:
        return self.grid.forward(self.data)

    def scaled(self, factor: float) -> "PerturbationState":
        return PerturbationState(self.grid, factor * self.data, self.t)

    def with_time(self, t: float) -> "PerturbationState":
        return PerturbationState(self.grid, self.data, t)

    @property
    def a(self) -> np.ndarray:
        return self.data[SCALAR]

    @property
    def v(self) -> np.ndarray:
        return self.data[VECTOR]

    @property
    def h(self) -> np.ndarray:
        return self.data[HEAT]

    @property
    def m(self) -> np.ndarray:
        return self.data[TURBULENT]

    @property
    def eps(self) -> np.ndarray:
        return self.data[DISSIPATION]

    def is_zero(self) -> bool:
        return not np.any(self.data)


def to_perturbation(
    state: PhysicalState,
    params: ModelParams,
    constants: DerivedConstants,
    t: float = 0.0,
) -> PerturbationState:
    """a = ρ − ρ̄, v = u/(γλ), m = k − k̄; h and ε are copied."""
    data = state.data.copy()
    data[SCALAR] -= params.rho_bar
    data[VECTOR] /= constants.gamma_lambda
    data[TURBULENT] -= params.k_bar
    return PerturbationState(state.grid, data, t)


def from_perturbation(
    state: PerturbationState,
    params: ModelParams,
    constants: DerivedConstants,
    grid: Optional[Grid] = None,
) -> PhysicalState:
    """Inverse of ``to_perturbation``; ``grid`` must match the state's grid if given."""
    if grid is not None and grid != state.grid:
        raise ShapeError("perturbation state lives on a different grid")
    data = state.data.copy()
    data[SCALAR] += params.rho_bar
    data[VECTOR] *= constants.gamma_lambda
    data[TURBULENT] += params.k_bar
    return PhysicalState(state.grid, data)
