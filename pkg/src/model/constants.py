"""Closed-form constants and rate formulas of the turbulent flow system.

Pure functions over immutable inputs; every result is a double.
"""
import logging
import math
from typing import NamedTuple

from src.core.exceptions import DomainError, InvalidParametersError
from src.schemas.params import DerivedConstants, ModelParams, RateQuery

logger = logging.getLogger(__name__)

# Upper end (exclusive) of the L^p range covered by the decay theorem
P_THEOREM_MAX = 6.0 / 5.0


class IterationCap(NamedTuple):
    """Integer cap N of the power iteration; ``admissible`` is False when N < 0."""

    value: int
    admissible: bool


def derive_constants(params: ModelParams) -> DerivedConstants:
    """Return γ = sqrt(p'(ρ̄) + k̄) and λ = 1/ρ̄."""
    sound_sq = float(params.pressure.derivative(params.rho_bar)) + params.k_bar
    if not sound_sq > 0:
        raise InvalidParametersError(
            f"p'(rho_bar) + k_bar must be positive, got {sound_sq}",
            rho_bar=params.rho_bar,
            k_bar=params.k_bar,
        )
    return DerivedConstants(gamma=math.sqrt(sound_sq), lam=1.0 / params.rho_bar)


def sigma(query: RateQuery) -> float:
    """Decay exponent 3/2·(1/p − 1/q) + l/2; ``q`` may be infinite."""
    p, q, l = query.p, query.q, query.l
    if p < 1:
        raise DomainError(f"p must be at least 1, got {p}", p=p)
    if p > q:
        raise DomainError(f"p must not exceed q, got p={p}, q={q}", p=p, q=q)
    if l < 0:
        raise DomainError(f"derivative order must be non-negative, got {l}", l=l)
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    return 1.5 * (1.0 / p - inv_q) + 0.5 * l


def c1_bound(r1: float, r2: float) -> float:
    """Constant 2^{r2+1}/(r1 − 1) of the convolution inequality."""
    if not r1 > 1:
        raise DomainError(f"r1 must exceed 1, got {r1}", r1=r1)
    if not 0 <= r2 <= r1:
        raise DomainError(f"r2 must lie in [0, r1], got {r2}", r1=r1, r2=r2)
    return 2.0 ** (r2 + 1.0) / (r1 - 1.0)


def _check_theorem_p(p: float) -> None:
    if not 1 <= p < P_THEOREM_MAX:
        raise DomainError(f"p must lie in [1, 6/5), got {p}", p=p)


def iteration_cap(n: int, p: float) -> IterationCap:
    """Integer part of 2n(3/(2p) − 1/4) − 2.

    Negative values are returned as-is with ``admissible=False``.
    """
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}", n=n)
    _check_theorem_p(p)
    raw = 2.0 * n * (1.5 / p - 0.25) - 2.0
    # Guard against round-off just below an exact integer
    value = math.floor(raw + 1e-12)
    if value < 0:
        logger.debug(f"Iteration cap negative for n={n}, p={p}: {value}")
    return IterationCap(value=value, admissible=value >= 0)


def finite_power_rate(n: int, p: float) -> float:
    """Decay exponent of M(t)^{1/2} reached with the n-th power argument.

    Equals (3/(2p) − 1/4) − 3/(2n) and increases to σ(p, 2; 1) as n → ∞.
    """
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}", n=n)
    _check_theorem_p(p)
    return (1.5 / p - 0.25) - 1.5 / n
