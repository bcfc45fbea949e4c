"""Periodic box [0, L)³ with its real-input Fourier layout.

Arrays carry the three spatial axes last, so a leading component axis
(vector fields, the full state) broadcasts through every operator here.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np
import scipy.fft

from src.core.exceptions import InvalidParametersError, NumericError, ShapeError

logger = logging.getLogger(__name__)

_AXES = (-3, -2, -1)


@dataclass(frozen=True)
class Grid:
    """Cubic periodic grid of ``n`` points per axis and side ``box_length``."""

    n: int
    box_length: float
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise InvalidParametersError(f"N must be even and >= 4, got {self.n}", n=self.n)
        if not self.box_length > 0:
            raise InvalidParametersError(
                f"box length must be positive, got {self.box_length}",
                box_length=self.box_length,
            )

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def real_shape(self) -> Tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def spectral_shape(self) -> Tuple[int, int, int]:
        return (self.n, self.n, self.n // 2 + 1)

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sample positions per axis, shaped to broadcast over the box."""
        x = np.arange(self.n) * self.spacing
        return x[:, None, None], x[None, :, None], x[None, None, :]

    @cached_property
    def mode_indices(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Integer wavenumber indices {−N/2, …, N/2−1} (last axis: 0…N/2)."""
        full = np.rint(np.fft.fftfreq(self.n) * self.n).astype(int)
        half = np.arange(self.n // 2 + 1)
        return full[:, None, None], full[None, :, None], half[None, None, :]

    @cached_property
    def wavevector(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        scale = 2.0 * np.pi / self.box_length
        return tuple(scale * idx.astype(float) for idx in self.mode_indices)

    @cached_property
    def odd_wavevector(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Wavevector with the Nyquist index zeroed, the symbol of odd derivatives."""
        nyquist = self.n // 2
        return tuple(
            np.where(np.abs(idx) == nyquist, 0.0, k)
            for idx, k in zip(self.mode_indices, self.wavevector)
        )

    @cached_property
    def k_squared(self) -> np.ndarray:
        k1, k2, k3 = self.wavevector
        return k1**2 + k2**2 + k3**2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on modes kept by the 2/3 rule (|index| < N/3 on every axis)."""
        i1, i2, i3 = self.mode_indices
        keep = (3 * np.abs(i1) < self.n) & (3 * np.abs(i2) < self.n) & (3 * np.abs(i3) < self.n)
        return np.broadcast_to(keep, self.spectral_shape)

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        """Multiplicity of each half-spectrum coefficient in the full spectrum."""
        weights = np.full(self.n // 2 + 1, 2.0)
        weights[0] = 1.0
        weights[-1] = 1.0
        return weights[None, None, :]

    def axis_symbol(self, axis: int, order: int) -> np.ndarray:
        """(iξ_axis)^order, using the odd symbol for odd orders."""
        if order == 0:
            return np.ones(1)
        k = (self.odd_wavevector if order % 2 else self.wavevector)[axis]
        return (1j * k) ** order

    def derivative_symbol(self, alpha: Tuple[int, int, int]) -> np.ndarray:
        symbol = self.axis_symbol(0, alpha[0]) * self.axis_symbol(1, alpha[1])
        return np.broadcast_to(symbol * self.axis_symbol(2, alpha[2]), self.spectral_shape)

    # Transforms --------------------------------------------------------

    def _check_real(self, values: np.ndarray) -> None:
        if values.shape[-3:] != self.real_shape:
            raise ShapeError(
                f"expected trailing shape {self.real_shape}, got {values.shape}",
                shape=list(values.shape),
            )

    def _check_spectral(self, coeffs: np.ndarray) -> None:
        if coeffs.shape[-3:] != self.spectral_shape:
            raise ShapeError(
                f"expected trailing shape {self.spectral_shape}, got {coeffs.shape}",
                shape=list(coeffs.shape),
            )

    def forward(self, values: np.ndarray) -> np.ndarray:
        self._check_real(values)
        if not np.all(np.isfinite(values)):
            raise NumericError("non-finite samples in forward transform")
        return scipy.fft.rfftn(values, axes=_AXES, workers=self.workers)

    def backward(self, coeffs: np.ndarray) -> np.ndarray:
        self._check_spectral(coeffs)
        if not np.all(np.isfinite(coeffs)):
            raise NumericError("non-finite coefficients in backward transform")
        return scipy.fft.irfftn(coeffs, s=self.real_shape, axes=_AXES, workers=self.workers)

    # Quadratures -------------------------------------------------------

    def spectral_inner(self, left: np.ndarray, right: np.ndarray) -> float:
        """L² inner product of two real fields given by their coefficients."""
        scale = self.cell_volume / self.n**3
        product = np.real(np.conj(left) * right) * self.parseval_weights
        return float(scale * product.sum())

    def spectral_l2_squared(self, coeffs: np.ndarray) -> float:
        return self.spectral_inner(coeffs, coeffs)

    def physical_integral(self, values: np.ndarray) -> float:
        return float(values.sum() * self.cell_volume)

    def position(self, index: Tuple[int, int, int]) -> Tuple[float, float, float]:
        return tuple(float(i) * self.spacing for i in index)
