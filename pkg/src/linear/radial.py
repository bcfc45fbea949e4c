"""Whole-space L² norms of linear evolutions of radially symmetric data.

With the unitary Fourier transform, ‖∇^l g‖₂² = ∫ |ξ|^{2l} |ĝ(ξ)|² dξ, so for
radial data the norm reduces to a one-dimensional integral in r = |ξ| that is
free of any box truncation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from src.core.exceptions import DomainError, NumericError, TruncationError
from src.linear.propagator import block_coefficients
from src.schemas.params import DerivedConstants

logger = logging.getLogger(__name__)

# Share of the t=0 mass allowed beyond xi_max
TAIL_TOLERANCE = 1e-10
# Geometric panels [xi_max/2^{j+1}, xi_max/2^j] refine toward the origin
PANEL_LEVELS = 60
MIN_ORDER = 8
MAX_ORDER = 512

RadialFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RadialProfile:
    """Fourier transform ĝ(|ξ|) of radial data, supported in practice on (0, xi_max]."""

    transform: RadialFunction
    xi_max: float
    name: str = "custom"

    def __post_init__(self):
        if not self.xi_max > 0:
            raise DomainError(f"xi_max must be positive, got {self.xi_max}")

        def density(r):
            return 4.0 * math.pi * r**2 * abs(float(self.transform(np.asarray(r)))) ** 2

        total, _ = integrate.quad(density, 0.0, np.inf, limit=200)
        tail, _ = integrate.quad(density, self.xi_max, np.inf, limit=200)
        if total > 0 and tail > TAIL_TOLERANCE * total:
            raise TruncationError(
                f"profile {self.name} keeps {tail / total:.3e} of its mass beyond "
                f"xi_max={self.xi_max}",
                xi_max=self.xi_max,
            )

    @classmethod
    def gaussian(
        cls, width: float, amplitude: float = 1.0, xi_max: Optional[float] = None
    ) -> "RadialProfile":
        """A·exp(−|x|²/(2w²)), whose transform is A·w³·exp(−w²r²/2)."""
        scale = amplitude * width**3
        return cls(
            transform=lambda r: scale * np.exp(-0.5 * width**2 * np.asarray(r) ** 2),
            xi_max=xi_max or 10.0 / width,
            name="gaussian",
        )

    @classmethod
    def gaussian_gradient(
        cls, width: float, amplitude: float = 1.0, xi_max: Optional[float] = None
    ) -> "RadialProfile":
        """Potential coefficient ŵ = i ξ̂·v̂ of v = ∇(A·exp(−|x|²/(2w²)))."""
        scale = amplitude * width**3
        return cls(
            transform=lambda r: -scale
            * np.asarray(r)
            * np.exp(-0.5 * width**2 * np.asarray(r) ** 2),
            xi_max=xi_max or 12.0 / width,
            name="gaussian-gradient",
        )


def _panels(xi_max: float):
    edges = xi_max * 0.5 ** np.arange(PANEL_LEVELS + 1)
    lower = np.append(edges[1:], 0.0)
    upper = np.append(edges[:-1], edges[-1])
    return lower, upper


def radial_integral(integrand: RadialFunction, xi_max: float, tol: float) -> float:
    """∫₀^{xi_max} integrand(r) dr by composite Gauss–Legendre.

    The order doubles until two successive values agree to ``tol``.
    """
    lower, upper = _panels(xi_max)
    half = 0.5 * (upper - lower)
    mid = 0.5 * (upper + lower)

    previous = None
    order = MIN_ORDER
    while order <= MAX_ORDER:
        nodes, weights = roots_legendre(order)
        r = mid[:, None] + half[:, None] * nodes[None, :]
        value = float(np.sum(half[:, None] * weights[None, :] * integrand(r)))
        if previous is not None and abs(value - previous) <= tol * abs(value):
            return value
        previous = value
        order *= 2
    raise NumericError(
        f"radial quadrature did not reach tolerance {tol} by order {MAX_ORDER}",
        tol=tol,
    )


def _check_arguments(t: float, l: int) -> None:
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}", t=t)
    if l not in (0, 1, 2):
        raise DomainError(f"derivative order must be 0, 1 or 2, got {l}", l=l)


def radial_l2_norm(
    profile: RadialProfile, t: float, l: int, lam: float, tol: float = 1e-12
) -> float:
    """‖∇^l S(t)g‖₂ on ℝ³ for radial g."""
    _check_arguments(t, l)

    def integrand(r):
        g = profile.transform(r)
        return 4.0 * np.pi * r ** (2 * l + 2) * np.exp(-2.0 * lam * r**2 * t) * g**2

    return math.sqrt(radial_integral(integrand, profile.xi_max, tol))


def radial_acoustic_l2_norm(
    density: Optional[RadialProfile],
    potential: Optional[RadialProfile],
    t: float,
    l: int,
    constants: DerivedConstants,
    tol: float = 1e-12,
) -> float:
    """‖∇^l E(t)(a₀, v₀)‖₂ on ℝ³ for radial a₀ and potential v₀."""
    _check_arguments(t, l)
    if density is None and potential is None:
        return 0.0
    xi_max = max(p.xi_max for p in (density, potential) if p is not None)

    def integrand(r):
        a_hat = density.transform(r) if density is not None else np.zeros_like(r)
        w_hat = potential.transform(r) if potential is not None else np.zeros_like(r)
        p11, p12, p21, p22 = block_coefficients(
            constants.gamma * r, 2.0 * constants.lam * r**2, t
        )
        a_t = p11 * a_hat + p12 * w_hat
        w_t = p21 * a_hat + p22 * w_hat
        return 4.0 * np.pi * r ** (2 * l + 2) * (a_t**2 + w_t**2)

    return math.sqrt(radial_integral(integrand, xi_max, tol))
