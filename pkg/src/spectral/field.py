"""Fields on a grid, tagged with their representation."""
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import List, Literal, Optional, Tuple

import numpy as np

from src.core.exceptions import DomainError, UnsupportedOrderError
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)

Direction = Literal["forward", "backward"]
MultiIndex = Tuple[int, int, int]

MAX_DERIVATIVE_ORDER = 4


@dataclass(frozen=True)
class Field:
    """Real samples (``spectral=False``) or half-spectrum coefficients.

    Leading axes, if any, index components of a vector or of the full state.
    """

    grid: Grid
    values: np.ndarray
    spectral: bool = False

    def __post_init__(self):
        if self.spectral:
            self.grid._check_spectral(self.values)
        else:
            self.grid._check_real(self.values)

    @property
    def components(self) -> Tuple[int, ...]:
        return self.values.shape[:-3]

    def to_spectral(self) -> "Field":
        return self if self.spectral else transform(self, "forward")

    def to_physical(self) -> "Field":
        return transform(self, "backward") if self.spectral else self


def transform(field: Field, direction: Optional[Direction] = None) -> Field:
    """Switch representation; ``direction`` defaults to the other one."""
    if direction is None:
        direction = "backward" if field.spectral else "forward"
    if direction == "forward":
        if field.spectral:
            raise DomainError("field is already spectral")
        return Field(field.grid, field.grid.forward(field.values), spectral=True)
    if direction == "backward":
        if not field.spectral:
            raise DomainError("field is already in physical space")
        return Field(field.grid, field.grid.backward(field.values), spectral=False)
    raise DomainError(f"unknown transform direction {direction!r}")


@lru_cache(maxsize=None)
def multi_indices(order: int) -> Tuple[MultiIndex, ...]:
    """All α with |α| = order, in lexicographic order."""
    if order < 0:
        raise DomainError(f"derivative order must be non-negative, got {order}")
    return tuple(
        alpha for alpha in product(range(order + 1), repeat=3) if sum(alpha) == order
    )


def multi_indices_between(min_order: int, max_order: int) -> List[MultiIndex]:
    indices: List[MultiIndex] = []
    for order in range(min_order, max_order + 1):
        indices.extend(multi_indices(order))
    return indices


def derivative(field: Field, alpha: MultiIndex) -> Field:
    """∂^α of ``field``, returned in spectral representation."""
    if any(a < 0 for a in alpha):
        raise DomainError(f"multi-index must be non-negative, got {alpha}")
    if sum(alpha) > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(
            f"derivative order {sum(alpha)} exceeds {MAX_DERIVATIVE_ORDER}",
            alpha=list(alpha),
        )
    spectral = field.to_spectral()
    symbol = field.grid.derivative_symbol(tuple(alpha))
    return Field(field.grid, spectral.values * symbol, spectral=True)


def dealias(field: Field) -> Field:
    """Zero every mode outside the 2/3 band; keeps the input representation."""
    spectral = field.to_spectral()
    filtered = Field(field.grid, spectral.values * field.grid.dealias_mask, spectral=True)
    return filtered if field.spectral else filtered.to_physical()


def inner_product(left: Field, right: Field) -> float:
    """L² inner product summed over components."""
    if left.grid != right.grid:
        raise DomainError("fields live on different grids")
    return left.grid.spectral_inner(left.to_spectral().values, right.to_spectral().values)
