"""Exact per-mode propagators of the linearized system.

Every Fourier mode of (a, v) couples the density coefficient â with the
potential coefficient ŵ = i ξ̂·v̂ through the 2×2 matrix

    M = [[0, −γc], [γc, −d]],   c = |ξ|,  d = λ(|ξ|² + c²),

while the solenoidal part of v̂ and the scalars h, m, ε decay with the heat
factor of rate λ|ξ|². Any entire function f of τM is written as
f(τM) = α I + β N with N = τM − sI, s half the trace, so the same code serves
the exponential and the φ-functions of exponential integrators.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Literal, Tuple

import numpy as np

from src.core.exceptions import DomainError
from src.schemas.params import DerivedConstants
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)

MatrixFunction = Literal["exp", "phi1", "phi2"]

# Relative size of the discriminant below which the Jordan limit is used
DEGENERATE_TOLERANCE = 1e-12
# |z| below which φ_k is summed as a Taylor series
PHI_SERIES_RADIUS = 1.0
PHI_SERIES_TERMS = 25
# Propagators kept per LinearPropagator; the oldest is dropped first
PROPAGATOR_CACHE_SIZE = 12


def phi(k: int, z) -> np.ndarray:
    """φ_k(z) = Σ_j z^j/(j+k)!, for complex arrays; φ_0 = exp."""
    z = np.asarray(z, dtype=complex)
    if k == 0:
        return np.exp(z)
    out = np.empty_like(z)
    small = np.abs(z) < PHI_SERIES_RADIUS

    zs = z[small]
    series = np.full_like(zs, 1.0 / math.factorial(PHI_SERIES_TERMS - 1 + k))
    for j in range(PHI_SERIES_TERMS - 2, -1, -1):
        series = series * zs + 1.0 / math.factorial(j + k)
    out[small] = series

    zl = z[~small]
    value = np.exp(zl)
    for j in range(k):
        value = (value - 1.0 / math.factorial(j)) / zl
    out[~small] = value
    return out


def phi_derivative(k: int, z) -> np.ndarray:
    """φ_k'(z) = φ_k(z) − k·φ_{k+1}(z)."""
    return phi(k, z) - k * phi(k + 1, z)


_ORDERS: Dict[str, int] = {"exp": 0, "phi1": 1, "phi2": 2}


def _exp_coefficients(s, q, disc, degenerate) -> Tuple[np.ndarray, np.ndarray]:
    r = np.sqrt(np.abs(disc))
    real = (disc > 0) & ~degenerate
    oscillating = (disc < 0) & ~degenerate

    alpha = np.empty_like(s)
    beta = np.empty_like(s)

    # Two real eigenvalues; the upper one is q/(s − r), free of cancellation
    sr, qr, rr = s[real], q[real], r[real]
    upper = np.exp(qr / (sr - rr))
    gap = np.exp(-2.0 * rr)
    alpha[real] = upper * (1.0 + gap) / 2.0
    beta[real] = upper * (-np.expm1(-2.0 * rr)) / (2.0 * rr)

    so, ro = s[oscillating], r[oscillating]
    alpha[oscillating] = np.exp(so) * np.cos(ro)
    beta[oscillating] = np.exp(so) * np.sinc(ro / np.pi)

    sd, dd = s[degenerate], disc[degenerate]
    alpha[degenerate] = np.exp(sd) * (1.0 + dd / 2.0)
    beta[degenerate] = np.exp(sd) * (1.0 + dd / 6.0)
    return alpha, beta


def _phi_coefficients(order, s, q, disc, degenerate) -> Tuple[np.ndarray, np.ndarray]:
    root = np.sqrt(disc.astype(complex))
    regular = ~degenerate

    alpha = np.empty_like(s)
    beta = np.empty_like(s)

    sg, rg, qg = s[regular], root[regular], q[regular]
    # Keep the eigenvalue nearer zero accurate when d ≫ c
    upper = np.where(np.real(rg) > 0, qg / (sg - rg), sg + rg)
    lower = sg - rg
    f_upper = phi(order, upper)
    f_lower = phi(order, lower)
    alpha[regular] = np.real((f_upper + f_lower) / 2.0)
    beta[regular] = np.real((f_upper - f_lower) / (2.0 * rg))

    sd = s[degenerate]
    alpha[degenerate] = np.real(phi(order, sd))
    beta[degenerate] = np.real(phi_derivative(order, sd))
    return alpha, beta


def block_coefficients(
    coupling, damping, tau: float, function: MatrixFunction = "exp"
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Entries (P11, P12, P21, P22) of f(τ[[0, −g], [g, −d]]) elementwise."""
    if function not in _ORDERS:
        raise DomainError(f"unknown matrix function {function!r}")
    g = np.atleast_1d(np.asarray(coupling, dtype=float)) * tau
    d = np.atleast_1d(np.asarray(damping, dtype=float)) * tau
    g, d = np.broadcast_arrays(g, d)

    s = -d / 2.0
    q = g**2
    disc = s**2 - q
    degenerate = np.abs(disc) <= DEGENERATE_TOLERANCE * np.maximum(s**2, q)

    if function == "exp":
        alpha, beta = _exp_coefficients(s, q, disc, degenerate)
    else:
        alpha, beta = _phi_coefficients(_ORDERS[function], s, q, disc, degenerate)

    half = d / 2.0
    return (alpha + beta * half, -beta * g, beta * g, alpha - beta * half)


def scalar_function(rate, tau: float, function: MatrixFunction = "exp") -> np.ndarray:
    """f(−rate·τ) for the heat semigroup."""
    z = -np.asarray(rate, dtype=float) * tau
    if function == "exp":
        return np.exp(z)
    return np.real(phi(_ORDERS[function], z))


def acoustic_mode(xi_abs: float, t: float, constants: DerivedConstants) -> np.ndarray:
    """exp(t·[[0, −γ|ξ|], [γ|ξ|, −2λ|ξ|²]]) acting on (â, ŵ)."""
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}", t=t)
    if xi_abs < 0:
        raise DomainError(f"|xi| must be non-negative, got {xi_abs}", xi=xi_abs)
    p11, p12, p21, p22 = block_coefficients(
        constants.gamma * xi_abs, 2.0 * constants.lam * xi_abs**2, t
    )
    return np.array([[p11[0], p12[0]], [p21[0], p22[0]]], dtype=complex)


@dataclass(frozen=True)
class ModePropagator:
    """f(τA) on every mode of a grid: the acoustic block plus heat factors."""

    t: float
    function: str
    acoustic: Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    solenoidal: np.ndarray
    heat: np.ndarray


class LinearPropagator:
    """Applies entire functions of the linear operator to spectral states.

    Propagators are cached per (function, τ); a run with a fixed step builds
    each of them once.
    """

    def __init__(self, grid: Grid, constants: DerivedConstants):
        self.grid = grid
        self.constants = constants

        k_odd = np.stack(np.broadcast_arrays(*grid.odd_wavevector))
        self.c = np.sqrt(np.sum(k_odd**2, axis=0))
        safe = np.where(self.c > 0, self.c, 1.0)
        self.unit = np.where(self.c > 0, k_odd / safe, 0.0)

        k_squared = np.broadcast_to(grid.k_squared, grid.spectral_shape)
        self.heat_rate = constants.lam * k_squared
        self.damping = constants.lam * (k_squared + self.c**2)
        self.coupling = constants.gamma * self.c

        self._cache: Dict[Tuple[str, float], ModePropagator] = {}

    def propagator(self, tau: float, function: MatrixFunction = "exp") -> ModePropagator:
        if tau < 0:
            raise DomainError(f"time must be non-negative, got {tau}", t=tau)
        key = (function, float(tau))
        cached = self._cache.get(key)
        if cached is None:
            shape = self.grid.spectral_shape
            block = block_coefficients(self.coupling, self.damping, tau, function)
            heat = scalar_function(self.heat_rate, tau, function)
            cached = ModePropagator(
                t=float(tau),
                function=function,
                acoustic=tuple(entry.reshape(shape) for entry in block),
                solenoidal=heat,
                heat=heat,
            )
            if len(self._cache) >= PROPAGATOR_CACHE_SIZE:
                self._cache.pop(next(iter(self._cache)))
            self._cache[key] = cached
            logger.debug(f"Built {function} propagator for tau={tau}")
        return cached

    def potential(self, v_hat: np.ndarray) -> np.ndarray:
        """ŵ = i ξ̂·v̂ (zero where the odd symbol vanishes)."""
        return 1j * np.sum(self.unit * v_hat, axis=0)

    def apply_acoustic(
        self, a_hat: np.ndarray, v_hat: np.ndarray, prop: ModePropagator
    ) -> Tuple[np.ndarray, np.ndarray]:
        w_hat = self.potential(v_hat)
        solenoidal = v_hat + 1j * w_hat * self.unit
        p11, p12, p21, p22 = prop.acoustic
        a_new = p11 * a_hat + p12 * w_hat
        w_new = p21 * a_hat + p22 * w_hat
        v_new = prop.solenoidal * solenoidal - 1j * w_new * self.unit
        return a_new, v_new

    def apply(
        self, coeffs: np.ndarray, tau: float, function: MatrixFunction = "exp"
    ) -> np.ndarray:
        """f(τA) applied to a spectral state of shape (7, N, N, N/2+1)."""
        prop = self.propagator(tau, function)
        out = np.empty_like(coeffs)
        out[0], out[1:4] = self.apply_acoustic(coeffs[0], coeffs[1:4], prop)
        out[4:7] = prop.heat * coeffs[4:7]
        return out


def apply_E(
    a_hat: np.ndarray,
    v_hat: np.ndarray,
    t: float,
    propagator: LinearPropagator,
) -> Tuple[np.ndarray, np.ndarray]:
    """Semigroup E(t) on spectral (a, v)."""
    return propagator.apply_acoustic(a_hat, v_hat, propagator.propagator(t))


def apply_S(field_hat: np.ndarray, t: float, grid: Grid, lam: float) -> np.ndarray:
    """Heat semigroup S(t): multiply each coefficient by e^{−λ|ξ|²t}."""
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}", t=t)
    return field_hat * np.exp(-lam * grid.k_squared * t)
