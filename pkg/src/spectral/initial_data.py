"""Deterministic initial perturbations."""
import logging
from typing import Optional

import numpy as np

from src.core.exceptions import ResolutionError
from src.model.state import COMPONENTS, PerturbationState
from src.schemas.params import FieldWeights, GaussianBump, InitialRecipe, RandomSmooth
from src.spectral.field import Field
from src.spectral.grid import Grid
from src.spectral.norms import derivative_weight, sobolev_norm

logger = logging.getLogger(__name__)

# Largest admissible share of the H³ energy sitting near the Nyquist planes
RESOLUTION_TOLERANCE = 1e-6
# Modes with some |index| above this fraction of N/2 count as the tail
TAIL_START = 0.9


def _component_weights(weights: FieldWeights) -> np.ndarray:
    wa, wv, wh, wm, weps = weights
    return np.array([wa, wv, wv, wv, wh, wm, weps])[:, None, None, None]


def _squared_distance(grid: Grid, center) -> np.ndarray:
    x1, x2, x3 = grid.coordinates
    return (x1 - center[0]) ** 2 + (x2 - center[1]) ** 2 + (x3 - center[2]) ** 2


def gaussian_profile(grid: Grid, width: float, center=None) -> np.ndarray:
    """exp(−|x−c|²/(2w²)); the box centre by default."""
    if center is None:
        center = (0.5 * grid.box_length,) * 3
    return np.exp(-_squared_distance(grid, center) / (2.0 * width**2))


def _gaussian_bump(grid: Grid, recipe: GaussianBump) -> np.ndarray:
    if 8.0 * recipe.width > grid.box_length:
        raise ResolutionError(
            f"bump of width {recipe.width} does not fit inside a box of {grid.box_length}",
            width=recipe.width,
        )
    profile = gaussian_profile(grid, recipe.width, recipe.center)
    return recipe.amplitude * _component_weights(recipe.weights) * profile


def _random_smooth(grid: Grid, recipe: RandomSmooth, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((COMPONENTS,) + grid.real_shape)
    damped = grid.forward(noise) * np.exp(-recipe.decay_rate * grid.k_squared)
    smooth = grid.backward(damped)
    rms = np.sqrt(np.mean(smooth**2, axis=(1, 2, 3), keepdims=True))
    smooth = smooth / np.where(rms > 0, rms, 1.0)
    window = gaussian_profile(grid, recipe.window_fraction * grid.box_length)
    return recipe.amplitude * _component_weights(recipe.weights) * smooth * window


def _check_resolved(grid: Grid, data: np.ndarray) -> None:
    coeffs = np.abs(grid.forward(data)) ** 2 * grid.parseval_weights
    weighted = coeffs * derivative_weight(grid, 0, 3)
    i1, i2, i3 = grid.mode_indices
    cutoff = TAIL_START * grid.n / 2
    tail = (np.abs(i1) >= cutoff) | (np.abs(i2) >= cutoff) | (np.abs(i3) >= cutoff)
    total = weighted.sum()
    share = float(weighted[:, np.broadcast_to(tail, grid.spectral_shape)].sum() / total)
    if share > RESOLUTION_TOLERANCE:
        raise ResolutionError(
            f"initial data under-resolved: {share:.3e} of the H3 energy is near Nyquist",
            tail_share=share,
        )


def make_initial_data(
    grid: Grid, recipe: InitialRecipe, seed: int = 0, t: float = 0.0
) -> PerturbationState:
    """Build W₀ from ``recipe``; a pure function of (grid, recipe, seed)."""
    if isinstance(recipe, GaussianBump):
        data = _gaussian_bump(grid, recipe)
    else:
        data = _random_smooth(grid, recipe, seed)

    if not np.any(data):
        return PerturbationState.zeros(grid, t)

    _check_resolved(grid, data)

    delta: Optional[float] = recipe.delta
    if delta is not None:
        size = sobolev_norm(Field(grid, data), 3)
        data = data * (delta / size)
        logger.debug(f"Rescaled initial data from H3 size {size:.6e} to {delta:.6e}")

    logger.info(
        "Initial data ready",
        extra={"recipe": recipe.kind, "seed": seed, "n": grid.n},
    )
    return PerturbationState(grid, data, t)


def bump_radius(recipe: InitialRecipe, grid: Grid) -> float:
    """Effective support radius used for the fidelity window."""
    if isinstance(recipe, GaussianBump):
        return 3.0 * recipe.width
    return 3.0 * recipe.window_fraction * grid.box_length


def h3_size(state: PerturbationState) -> float:
    return sobolev_norm(Field(state.grid, state.data), 3)

