"""Decay analysis: norm battery, energy functional, exponent fits and verdicts."""
import logging
import math
import warnings
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from src.core.exceptions import (
    CoefficientTooSmallError,
    DomainError,
    InsufficientDataError,
    NumericError,
)
from src.model.constants import c1_bound, sigma
from src.model.state import PerturbationState
from src.nonlinear.rhs import NonlinearForcing, linear_operator
from src.schemas.params import AnalysisSettings, DerivedConstants, ModelParams, RateQuery
from src.schemas.records import (
    ClaimVerdict,
    ConvolutionBoundEntry,
    ConvolutionBoundReport,
    DissipationBalance,
    FitResult,
    NormRecord,
    Report,
)
from src.spectral.field import Field
from src.spectral.grid import Grid
from src.spectral.norms import derivative_energy, derivative_weight, lq_norm

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 8

# Default lattice of the convolution-inequality certificate
DEFAULT_R1 = (1.25, 1.5, 2.0, 3.0)
DEFAULT_T_GRID = (0.1, 1.0, 10.0, 100.0, 1000.0)


# Energy functional -----------------------------------------------------------


def _cross_form(grid: Grid, v_hat: np.ndarray, a_hat: np.ndarray) -> float:
    """Σ_{1≤|α|≤2} Σ_j ⟨∂^α v_j, ∂_j ∂^α a⟩ from spectral coefficients."""
    ik = 1j * np.stack(np.broadcast_arrays(*grid.odd_wavevector))
    pairing = np.real(np.sum(np.conj(v_hat) * ik * a_hat, axis=0))
    weight = derivative_weight(grid, 1, 2) * grid.parseval_weights
    return float(grid.cell_volume / grid.n**3 * np.sum(weight * pairing))


def cross_term(state: PerturbationState) -> float:
    coeffs = state.spectral()
    return _cross_form(state.grid, coeffs[1:4], coeffs[0])


def cross_term_bound(state: PerturbationState) -> float:
    """½Σ(‖∂^α v‖² + ‖∇∂^α a‖²) over 1 ≤ |α| ≤ 2, a bound on |cross_term|."""
    grid = state.grid
    coeffs = state.spectral()
    c_squared = sum(k**2 for k in grid.odd_wavevector)
    density = np.sum(np.abs(coeffs[1:4]) ** 2, axis=0) + c_squared * np.abs(coeffs[0]) ** 2
    weight = derivative_weight(grid, 1, 2) * grid.parseval_weights
    return 0.5 * float(grid.cell_volume / grid.n**3 * np.sum(weight * density))


def gradient_energy(state: PerturbationState) -> float:
    """‖∇W‖²_{H²}."""
    return derivative_energy(Field(state.grid, state.data), 1, 3)


def energy_functional(state: PerturbationState, coefficient: float) -> float:
    """M = C·Σ_{1≤|α|≤3}‖∂^α W‖² + Σ_{1≤|α|≤2}⟨∂^α v, ∇∂^α a⟩."""
    if not coefficient > 0:
        raise DomainError(f"coefficient must be positive, got {coefficient}")
    return coefficient * gradient_energy(state) + cross_term(state)


def check_equivalence(states: Iterable[PerturbationState], coefficient: float) -> float:
    """Smallest C₂ with G/C₂ ≤ M ≤ C₂·G over the sample, G = ‖∇W‖²_{H²}."""
    measured = 0.0
    nonzero = 0
    for index, state in enumerate(states):
        g = gradient_energy(state)
        if g == 0.0:
            continue
        nonzero += 1
        m = energy_functional(state, coefficient)
        if not m > 0:
            raise CoefficientTooSmallError(
                f"M={m:.6e} is not positive for sample {index}; raise the coefficient",
                sample=index,
                coefficient=coefficient,
            )
        measured = max(measured, m / g, g / m)
    if nonzero == 0:
        raise InsufficientDataError("equivalence check needs a nonzero state")
    logger.info(f"Measured equivalence constant {measured:.6g} over {nonzero} states")
    return measured


def dissipation_balance(
    state: PerturbationState,
    params: ModelParams,
    constants: DerivedConstants,
    coefficient: float,
    nonlinear: bool = True,
) -> DissipationBalance:
    """dM/dt, the dissipation and ‖∇W‖₂² for one state.

    ``constant`` is (dM/dt + dissipation)/‖∇W‖₂², the smallest constant that
    makes the dissipation inequality hold at this state.
    """
    grid = state.grid
    coeffs = state.spectral()
    tendency = linear_operator(grid, constants, coeffs)
    if nonlinear:
        tendency = tendency + NonlinearForcing(grid, params, constants)(coeffs)

    weight = derivative_weight(grid, 1, 3) * grid.parseval_weights
    scale = grid.cell_volume / grid.n**3
    rate = 2.0 * coefficient * scale * float(
        np.sum(weight * np.real(np.conj(coeffs) * tendency))
    )
    rate += _cross_form(grid, tendency[1:4], coeffs[0])
    rate += _cross_form(grid, coeffs[1:4], tendency[0])

    dissipation = derivative_energy(Field(grid, state.a), 2, 3) + derivative_energy(
        Field(grid, state.data[1:7]), 2, 4
    )
    gradient_sq = derivative_energy(Field(grid, state.data), 1, 1)
    constant = (rate + dissipation) / gradient_sq if gradient_sq > 0 else None
    return DissipationBalance(
        rate=rate, dissipation=dissipation, gradient_squared=gradient_sq, constant=constant
    )


# Norm battery ---------------------------------------------------------------


def norm_battery(
    state: PerturbationState,
    params: ModelParams,
    constants: DerivedConstants,
    coefficient: float,
    nonlinear: bool = True,
    floor_fraction: Optional[float] = None,
) -> NormRecord:
    grid = state.grid
    field = Field(grid, state.data)
    coeffs = state.spectral()

    tendency = linear_operator(grid, constants, coeffs)
    if nonlinear:
        forcing = NonlinearForcing(grid, params, constants, floor_fraction)
        tendency = tendency + forcing(coeffs)

    return NormRecord(
        t=state.t,
        l2=lq_norm(field, 2),
        l3=lq_norm(field, 3),
        l6=lq_norm(field, 6),
        linf=lq_norm(field, math.inf),
        h2grad=math.sqrt(derivative_energy(field, 1, 3)),
        dtl2=math.sqrt(grid.spectral_l2_squared(tendency)),
        energy=energy_functional(state, coefficient),
        mass=float(np.real(coeffs[0, 0, 0, 0])) * grid.cell_volume,
    )


# Exponent fits ----------------------------------------------------------------


def fit_exponent(
    times: Sequence[float], values: Sequence[float], window: Tuple[float, float]
) -> FitResult:
    """Least-squares slope of log(value) against log(1+t) inside ``window``."""
    t0, t1 = window
    if not t1 > t0:
        raise DomainError(f"empty fitting window [{t0}, {t1}]")
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    inside = (t >= t0) & (t <= t1)
    if int(inside.sum()) < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            f"{int(inside.sum())} samples in [{t0}, {t1}], need {MIN_FIT_SAMPLES}",
            window=[t0, t1],
        )
    t, y = t[inside], y[inside]
    if np.any(y <= 0):
        raise DomainError("values must be positive inside the fitting window")

    x = np.log1p(t)
    log_y = np.log(y)
    slope, intercept = np.polyfit(x, log_y, 1)
    residual = log_y - (slope * x + intercept)
    return FitResult(
        exponent=float(slope),
        intercept=float(intercept),
        window_start=float(t.min()),
        window_end=float(t.max()),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        samples=int(t.size),
    )


# Convolution inequality ---------------------------------------------------------


def convolution_integral(r1: float, r2: float, t: float, tol: float = 1e-10) -> float:
    """∫₀ᵗ (1+t−s)^{−r₁}(1+s)^{−r₂} ds by adaptive quadrature, split at t/2."""
    if t <= 0:
        return 0.0

    def integrand(s):
        return (1.0 + t - s) ** (-r1) * (1.0 + s) ** (-r2)

    total = 0.0
    for lower, upper in ((0.0, t / 2.0), (t / 2.0, t)):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, _ = integrate.quad(
                    integrand, lower, upper, epsabs=0.0, epsrel=tol, limit=200
                )
            except integrate.IntegrationWarning as e:
                raise NumericError(
                    f"quadrature did not converge for r1={r1}, r2={r2}, t={t}: {e}",
                    r1=r1,
                    r2=r2,
                    t=t,
                ) from e
        total += value
    return total


def verify_convolution_bound(
    r1: float, r2: float, t_grid: Sequence[float], tol: float = 1e-10
) -> ConvolutionBoundReport:
    """Ratio of the convolution integral to C₁(r₁,r₂)(1+t)^{−r₂} at each t."""
    constant = c1_bound(r1, r2)
    entries: List[ConvolutionBoundEntry] = []
    for t in t_grid:
        if not t > 0:
            raise DomainError(f"times must be positive, got {t}", t=t)
        lhs = convolution_integral(r1, r2, t, tol)
        bound = constant * (1.0 + t) ** (-r2)
        entries.append(
            ConvolutionBoundEntry(r1=r1, r2=r2, t=t, lhs=lhs, bound=bound, ratio=lhs / bound)
        )
    return ConvolutionBoundReport(entries=entries)


def default_convolution_lattice(tol: float = 1e-10) -> ConvolutionBoundReport:
    entries: List[ConvolutionBoundEntry] = []
    for r1 in DEFAULT_R1:
        for r2 in (0.0, r1 / 2.0, r1):
            entries.extend(verify_convolution_bound(r1, r2, DEFAULT_T_GRID, tol).entries)
    return ConvolutionBoundReport(entries=entries)


# Theorem verdicts ---------------------------------------------------------------

# (claim, norm column, q, derivative order)
THEOREM_CLAIMS = (
    ("lq_decay[q=2]", "l2", 2.0, 0),
    ("lq_decay[q=3]", "l3", 3.0, 0),
    ("lq_decay[q=6]", "l6", 6.0, 0),
    ("sup_decay", "linf", 2.0, 1),
    ("gradient_decay", "h2grad", 2.0, 1),
    ("time_derivative_decay", "dtl2", 2.0, 1),
)


def fidelity_window(grid: Grid, constants: DerivedConstants, radius: float) -> float:
    """Time before acoustic fronts from the data's support meet their periodic images."""
    t_wrap = (0.5 * grid.box_length - radius) / constants.gamma
    if t_wrap <= 0:
        logger.warning(f"Data radius {radius} leaves no fidelity window")
        return 0.0
    return t_wrap


def fitting_window(
    settings: AnalysisSettings, t_wrap: Optional[float] = None
) -> Tuple[float, float]:
    t0 = settings.window_start
    t1 = settings.window_end if t_wrap is None else min(settings.window_end, 0.8 * t_wrap)
    if not t1 > t0:
        raise InsufficientDataError(
            f"fitting window [{t0}, {t1}] is empty", window=[t0, t1]
        )
    ratio = (1.0 + t1) / (1.0 + t0)
    if ratio < settings.min_window_ratio:
        raise InsufficientDataError(
            f"fitting window [{t0}, {t1}] spans a (1+t) ratio of {ratio:.3g}, "
            f"need {settings.min_window_ratio}",
            window=[t0, t1],
        )
    return t0, t1


def theorem_report(
    records: Sequence[NormRecord],
    p: float,
    settings: AnalysisSettings,
    t_wrap: Optional[float] = None,
) -> Report:
    """One-sided verdicts: a claim passes iff its fitted exponent ≤ −σ + slack."""
    window = fitting_window(settings, t_wrap)
    times = [record.t for record in records]
    claims: List[ClaimVerdict] = []

    for claim, column, q, l in THEOREM_CLAIMS:
        target = sigma(RateQuery(p=p, q=q, l=l))
        slack = settings.sup_slack if column == "linf" else settings.slack
        values = [getattr(record, column) for record in records]
        inside = [v for t, v in zip(times, values) if window[0] <= t <= window[1]]

        if inside and all(v == 0.0 for v in inside):
            claims.append(
                ClaimVerdict(
                    claim=claim,
                    target_exponent=target,
                    slack=slack,
                    verdict="pass",
                    degenerate=True,
                )
            )
            continue

        fit = fit_exponent(times, values, window)
        verdict = "pass" if fit.exponent <= -target + slack else "fail"
        claims.append(
            ClaimVerdict(
                claim=claim,
                target_exponent=target,
                fitted_exponent=fit.exponent,
                residual=fit.residual_rms,
                slack=slack,
                verdict=verdict,
            )
        )
        logger.info(
            f"{claim}: fitted {fit.exponent:.4f} against target -{target:.4f} -> {verdict}"
        )

    return Report(
        kind="theorem",
        claims=claims,
        details={"p": p, "window": list(window), "t_wrap": t_wrap},
    )


# Trajectory properties ------------------------------------------------------------

MASS_TOLERANCE = 1e-10
ENERGY_TOLERANCE = 1e-9


def mass_drift_rate(records: Sequence[NormRecord], mass_scale: float) -> float:
    """Largest relative change of ∫a per unit time.

    Changes are measured against max(|∫a₀|, ``mass_scale``); a perturbation
    with no density part is judged on the absolute drift.
    """
    first = records[0]
    scale = max(abs(first.mass), abs(mass_scale)) or 1.0
    drift = 0.0
    for record in records[1:]:
        elapsed = record.t - first.t
        if elapsed > 0:
            drift = max(drift, abs(record.mass - first.mass) / (scale * elapsed))
    return drift


def trajectory_claims(
    records: Sequence[NormRecord], mass_scale: float, settle_time: float = 1.0
) -> List[ClaimVerdict]:
    """Mass conservation and monotone M(t) after ``settle_time``.

    Args:
        records: Norm battery of one run, in time order
        mass_scale: ∫|a₀|, the size of the initial density perturbation

    Returns:
        Verdicts ``mass_conservation`` and ``energy_monotone``
    """
    if not records:
        raise InsufficientDataError("no norm records to check")
    drift = mass_drift_rate(records, mass_scale)

    settled = [record.energy for record in records if record.t >= settle_time]
    growth = 0.0
    for before, after in zip(settled, settled[1:]):
        if before > 0:
            growth = max(growth, (after - before) / before)

    return [
        ClaimVerdict(
            claim="mass_conservation",
            value=drift,
            slack=MASS_TOLERANCE,
            verdict="pass" if drift < MASS_TOLERANCE else "fail",
        ),
        ClaimVerdict(
            claim="energy_monotone",
            value=growth,
            slack=ENERGY_TOLERANCE,
            verdict="pass" if growth <= ENERGY_TOLERANCE else "fail",
            degenerate=not any(settled),
        ),
    ]
