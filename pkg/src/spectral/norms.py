"""Lebesgue and Sobolev norms of fields.

L^q norms use real-space quadrature on the samples; every derivative norm
goes through Parseval on the half spectrum.
"""
import logging
import math
from functools import lru_cache

import numpy as np

from src.core.exceptions import DomainError, UnsupportedOrderError
from src.spectral.field import MAX_DERIVATIVE_ORDER, Field, multi_indices_between
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)

# Cached weights are read-only; one entry per (grid, order range)
WEIGHT_CACHE_SIZE = 16


def _magnitude(field: Field) -> np.ndarray:
    values = field.to_physical().values
    if values.ndim == 3:
        return np.abs(values)
    flat = values.reshape((-1,) + values.shape[-3:])
    return np.sqrt(np.sum(flat**2, axis=0))


def lq_norm(field: Field, q: float) -> float:
    """(Σ|f(x)|^q·h³)^{1/q}; q = ∞ gives the grid maximum.

    Vector and state fields use the pointwise Euclidean magnitude.
    """
    if not q >= 1:
        raise DomainError(f"q must be at least 1, got {q}", q=q)
    magnitude = _magnitude(field)
    if math.isinf(q):
        return float(magnitude.max())
    peak = float(magnitude.max())
    if peak == 0.0:
        return 0.0
    # Scale by the peak so large q cannot overflow
    scaled = magnitude / peak
    return peak * float(np.sum(scaled**q) * field.grid.cell_volume) ** (1.0 / q)


def derivative_weight(grid: Grid, min_order: int, max_order: int) -> np.ndarray:
    """Σ_{min≤|α|≤max} |symbol of ∂^α|² on the half spectrum."""
    if max_order > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(
            f"order {max_order} exceeds {MAX_DERIVATIVE_ORDER}", order=max_order
        )
    if min_order < 0 or min_order > max_order:
        raise DomainError(f"invalid order range [{min_order}, {max_order}]")
    return _cached_weight(grid, min_order, max_order)


@lru_cache(maxsize=WEIGHT_CACHE_SIZE)
def _cached_weight(grid: Grid, min_order: int, max_order: int) -> np.ndarray:
    weight = np.zeros(grid.spectral_shape)
    for alpha in multi_indices_between(min_order, max_order):
        weight = weight + np.abs(grid.derivative_symbol(alpha)) ** 2
    weight.setflags(write=False)
    return weight


def derivative_energy(field: Field, min_order: int, max_order: int) -> float:
    """Σ_{min≤|α|≤max} ‖∂^α f‖₂² summed over components."""
    grid = field.grid
    coeffs = field.to_spectral().values
    weight = derivative_weight(grid, min_order, max_order)
    scale = grid.cell_volume / grid.n**3
    return float(scale * np.sum(weight * grid.parseval_weights * np.abs(coeffs) ** 2))


def sobolev_norm(field: Field, s: int) -> float:
    """H^s norm, sqrt of Σ_{|α|≤s} ‖∂^α f‖₂², for s in 0..4."""
    if s < 0:
        raise DomainError(f"Sobolev order must be non-negative, got {s}", s=s)
    if s > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(f"Sobolev order {s} is not supported", s=s)
    return math.sqrt(derivative_energy(field, 0, s))


def lp_size(field: Field, p: float) -> float:
    """Size ‖f‖_{L^p} + ‖f‖_{H¹} of initial data."""
    return lq_norm(field, p) + sobolev_norm(field, 1)
