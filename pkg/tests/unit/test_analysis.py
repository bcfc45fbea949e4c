"""Unit tests for the energy functional, exponent fits and verdicts."""
import math

import numpy as np
import pytest

from src.core.exceptions import CoefficientTooSmallError, DomainError, InsufficientDataError
from src.linear.propagator import LinearPropagator
from src.model.state import PerturbationState
from src.schemas.params import AnalysisSettings
from src.schemas.records import NormRecord
from src.services.analysis import (
    THEOREM_CLAIMS,
    check_equivalence,
    convolution_integral,
    cross_term,
    cross_term_bound,
    default_convolution_lattice,
    dissipation_balance,
    energy_functional,
    fidelity_window,
    fit_exponent,
    fitting_window,
    gradient_energy,
    mass_drift_rate,
    norm_battery,
    theorem_report,
    trajectory_claims,
    verify_convolution_bound,
)
from src.spectral.field import Field, derivative
from src.spectral.norms import lq_norm


def _without_velocity(state: PerturbationState) -> PerturbationState:
    data = state.data.copy()
    data[1:4] = 0.0
    return PerturbationState(state.grid, data)


def _record(t: float, **values: float) -> NormRecord:
    columns = dict(l2=0.0, l3=0.0, l6=0.0, linf=0.0, h2grad=0.0, dtl2=0.0, energy=0.0, mass=0.0)
    columns.update(values)
    return NormRecord(t=t, **columns)


def _power_law_records(exponents, times=range(61)):
    return [
        _record(float(t), **{column: (1.0 + t) ** (-rate) for column, rate in exponents.items()})
        for t in times
    ]


# Energy functional -------------------------------------------------------------


@pytest.mark.unit
def test_energy_of_zero_state(small_grid):
    """Test M(0) = 0."""
    assert energy_functional(PerturbationState.zeros(small_grid), 10.0) == 0.0


@pytest.mark.unit
def test_energy_without_velocity_is_weighted_gradient(random_state):
    """Test v ≡ 0 removes the cross term."""
    state = _without_velocity(random_state)

    assert cross_term(state) == 0.0
    assert energy_functional(state, 10.0) == pytest.approx(10.0 * gradient_energy(state), rel=1e-12)


@pytest.mark.unit
def test_energy_is_quadratic(random_state):
    """Test M(sW) = s²M(W)."""
    base = energy_functional(random_state, 10.0)

    assert energy_functional(random_state.scaled(3.0), 10.0) == pytest.approx(9.0 * base, rel=1e-12)


@pytest.mark.unit
def test_cross_term_is_bounded(random_state):
    """Test |Σ⟨∂^α v, ∇∂^α a⟩| stays below its Young bound."""
    assert abs(cross_term(random_state)) <= cross_term_bound(random_state)


@pytest.mark.unit
def test_energy_rejects_non_positive_coefficient(random_state):
    """Test the weight must be positive."""
    with pytest.raises(DomainError):
        energy_functional(random_state, 0.0)


# Equivalence -----------------------------------------------------------------------


@pytest.mark.unit
def test_equivalence_without_velocity(random_state):
    """Test v ≡ 0 gives C₂ = max(C, 1/C)."""
    states = [_without_velocity(random_state), _without_velocity(random_state.scaled(2.0))]

    assert check_equivalence(states, 10.0) == pytest.approx(10.0, rel=1e-12)
    assert check_equivalence(states, 0.25) == pytest.approx(4.0, rel=1e-12)


@pytest.mark.unit
def test_equivalence_detects_small_coefficient(random_state):
    """Test v = −∇a makes M negative for a tiny weight."""
    grid = random_state.grid
    a = Field(grid, random_state.a)
    data = random_state.data.copy()
    for axis, alpha in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1))):
        data[1 + axis] = -derivative(a, alpha).to_physical().values
    state = PerturbationState(grid, data)

    with pytest.raises(CoefficientTooSmallError) as excinfo:
        check_equivalence([state], 1e-6)

    assert excinfo.value.details["sample"] == 0


@pytest.mark.unit
def test_equivalence_needs_nonzero_states(small_grid):
    """Test empty and all-zero samples are rejected."""
    with pytest.raises(InsufficientDataError):
        check_equivalence([], 10.0)
    with pytest.raises(InsufficientDataError):
        check_equivalence([PerturbationState.zeros(small_grid)], 10.0)


# Norm battery and dissipation ---------------------------------------------------------


@pytest.mark.unit
def test_norm_battery_columns(random_state, params, constants):
    """Test the battery agrees with the norm primitives."""
    field = Field(random_state.grid, random_state.data)

    record = norm_battery(random_state, params, constants, 10.0)

    assert record.t == 0.0
    assert record.l2 == pytest.approx(lq_norm(field, 2), rel=1e-12)
    assert record.linf == lq_norm(field, math.inf)
    assert record.energy == pytest.approx(energy_functional(random_state, 10.0), rel=1e-12)
    grid = random_state.grid
    scale = grid.physical_integral(np.abs(random_state.a))
    assert record.mass == pytest.approx(grid.physical_integral(random_state.a), abs=1e-12 * scale)


@pytest.mark.unit
def test_dissipation_rate_matches_linear_flow(random_state, params, constants):
    """Test dM/dt against a difference quotient along e^{tA}."""
    grid = random_state.grid
    h = 1e-4
    moved = PerturbationState.from_spectral(
        grid, LinearPropagator(grid, constants).apply(random_state.spectral(), h)
    )

    balance = dissipation_balance(random_state, params, constants, 10.0, nonlinear=False)
    quotient = (energy_functional(moved, 10.0) - energy_functional(random_state, 10.0)) / h

    assert balance.rate == pytest.approx(quotient, rel=1e-3)
    assert balance.dissipation > 0
    assert balance.constant is not None


@pytest.mark.unit
def test_dissipation_of_zero_state(small_grid, params, constants):
    """Test the balance constant is undefined without gradients."""
    balance = dissipation_balance(PerturbationState.zeros(small_grid), params, constants, 10.0)

    assert balance.rate == 0.0
    assert balance.constant is None


# Exponent fits ---------------------------------------------------------------------


@pytest.mark.unit
def test_fit_recovers_power_law():
    """Test y = 3(1+t)^{−0.75} gives slope −0.75 and intercept log 3."""
    times = np.linspace(0.0, 100.0, 101)
    fit = fit_exponent(times, 3.0 * (1.0 + times) ** -0.75, (5.0, 50.0))

    assert fit.exponent == pytest.approx(-0.75, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-10)
    assert fit.residual_rms < 1e-12
    assert fit.samples == 46
    assert (fit.window_start, fit.window_end) == (5.0, 50.0)


@pytest.mark.unit
def test_fit_of_constant_and_perturbed_series():
    """Test a constant has slope 0 and 1% wiggles barely move a slope."""
    times = np.linspace(0.0, 100.0, 201)

    assert fit_exponent(times, np.full(times.shape, 2.0), (5.0, 50.0)).exponent == pytest.approx(0.0, abs=1e-12)
    wiggly = (1.0 + times) ** -1.25 * (1.0 + 0.01 * np.sin(times))
    assert fit_exponent(times, wiggly, (5.0, 50.0)).exponent == pytest.approx(-1.25, abs=0.01)


@pytest.mark.unit
def test_fit_errors():
    """Test empty windows, too few samples and non-positive values."""
    times = np.linspace(0.0, 100.0, 101)
    values = (1.0 + times) ** -1.0

    with pytest.raises(DomainError):
        fit_exponent(times, values, (5.0, 5.0))
    with pytest.raises(InsufficientDataError):
        fit_exponent(times, values, (5.0, 10.0))
    with pytest.raises(DomainError):
        fit_exponent(times, -values, (5.0, 50.0))


# Convolution inequality --------------------------------------------------------------


@pytest.mark.unit
def test_convolution_integral_closed_forms():
    """Test partial-fraction and r₂ = 0 closed forms."""
    assert convolution_integral(2.0, 1.0, 1.0) == pytest.approx(
        2.0 / 9.0 * math.log(2.0) + 1.0 / 6.0, rel=1e-9
    )
    for t in (0.5, 10.0, 1000.0):
        assert convolution_integral(2.0, 0.0, t) == pytest.approx(1.0 - 1.0 / (1.0 + t), rel=1e-9)
    assert convolution_integral(2.0, 1.0, 0.0) == 0.0


@pytest.mark.unit
def test_convolution_bound_holds_on_default_lattice():
    """Test every lattice ratio is at most one."""
    report = default_convolution_lattice()

    assert len(report.entries) == 4 * 3 * 5
    assert report.passed
    assert 0 < report.max_ratio <= 1.0


@pytest.mark.unit
def test_convolution_bound_domain():
    """Test r₁ ≤ 1 and non-positive times are rejected."""
    with pytest.raises(DomainError):
        verify_convolution_bound(1.0, 0.5, [1.0])
    with pytest.raises(DomainError):
        verify_convolution_bound(2.0, 1.0, [0.0])


# Verdicts -------------------------------------------------------------------------------


@pytest.mark.unit
def test_fitting_window_is_clipped_by_wrap_time():
    """Test the window end is min(window_end, 0.8·t_wrap)."""
    settings = AnalysisSettings()

    assert fitting_window(settings) == (5.0, 50.0)
    assert fitting_window(settings, t_wrap=100.0) == (5.0, 50.0)
    assert fitting_window(settings, t_wrap=40.0) == (5.0, 32.0)
    with pytest.raises(InsufficientDataError):
        fitting_window(settings, t_wrap=10.0)
    with pytest.raises(InsufficientDataError):
        fitting_window(settings, t_wrap=5.0)


@pytest.mark.unit
def test_fidelity_window(small_grid, unit_constants):
    """Test t_wrap = (L/2 − R)/γ and a bump filling the box."""
    assert fidelity_window(small_grid, unit_constants, 6.0) == pytest.approx(10.0)
    assert fidelity_window(small_grid, unit_constants, 20.0) == 0.0


@pytest.mark.unit
def test_theorem_report_on_zero_trajectory():
    """Test a run that stays at zero passes every claim as degenerate."""
    records = [_record(float(t)) for t in range(61)]

    report = theorem_report(records, 1.0, AnalysisSettings())

    assert report.passed
    assert all(claim.degenerate for claim in report.claims)
    assert [claim.claim for claim in report.claims] == [entry[0] for entry in THEOREM_CLAIMS]


@pytest.mark.unit
def test_theorem_report_on_exact_rates():
    """Test columns decaying at their theorem rate pass and a slow column fails."""
    exact = {"l2": 0.75, "l3": 1.0, "l6": 1.25, "linf": 1.25, "h2grad": 1.25, "dtl2": 1.25}

    report = theorem_report(_power_law_records(exact), 1.0, AnalysisSettings())

    assert report.passed
    l2_claim = report.claims[0]
    assert l2_claim.target_exponent == pytest.approx(0.75)
    assert l2_claim.fitted_exponent == pytest.approx(-0.75, abs=1e-10)
    assert report.details["window"] == [5.0, 50.0]

    slow = theorem_report(_power_law_records(dict(exact, l2=0.5)), 1.0, AnalysisSettings())
    assert not slow.passed
    assert [claim.verdict for claim in slow.claims].count("fail") == 1


@pytest.mark.unit
def test_report_json_shape():
    """Test the report serialises its schema version and overall verdict."""
    report = theorem_report([_record(float(t)) for t in range(61)], 1.0, AnalysisSettings())

    payload = report.to_json()

    assert '"schema": 1' in payload
    assert '"passed": true' in payload


@pytest.mark.unit
def test_trajectory_claims():
    """Test mass drift and energy growth after the settling time."""
    steady = [_record(float(t), mass=1.0, energy=math.exp(-t)) for t in range(10)]
    claims = trajectory_claims(steady, mass_scale=1.0)
    assert [claim.verdict for claim in claims] == ["pass", "pass"]
    assert claims[0].value == 0.0

    early_bump = [_record(0.0, energy=1.0), _record(0.5, energy=2.0)] + steady[1:]
    assert trajectory_claims(early_bump, 1.0)[1].verdict == "pass"

    growing = steady[:5] + [_record(5.0, mass=1.0, energy=1.0)]
    assert trajectory_claims(growing, 1.0)[1].verdict == "fail"

    leaking = steady[:-1] + [_record(9.0, mass=1.001, energy=0.0)]
    assert trajectory_claims(leaking, 1.0)[0].verdict == "fail"


@pytest.mark.unit
def test_trajectory_claims_edge_cases():
    """Test empty input and an all-zero energy column."""
    with pytest.raises(InsufficientDataError):
        trajectory_claims([], 1.0)

    flat = trajectory_claims([_record(float(t)) for t in range(5)], 1.0)
    assert flat[1].degenerate
    assert flat[1].verdict == "pass"
    assert flat[0].verdict == "pass"


@pytest.mark.unit
def test_mass_drift_is_relative_to_the_perturbation():
    """Test ∫a drifting by 0.1% over t = 25 fails against its own size."""
    drifting = [_record(float(t), mass=1e-3 * (1.0 + 4e-5 * t)) for t in range(26)]

    claim = trajectory_claims(drifting, mass_scale=1e-3)[0]

    assert claim.verdict == "fail"
    assert claim.value == pytest.approx(4e-5, rel=1e-6)


@pytest.mark.unit
def test_mass_drift_is_per_unit_time():
    """Test the drift rate divides by elapsed time and uses the larger scale."""
    records = [_record(0.0, mass=0.0), _record(10.0, mass=1e-12)]

    assert mass_drift_rate(records, 1.0) == pytest.approx(1e-13)
    assert mass_drift_rate(records, 0.01) == pytest.approx(1e-11)
    assert trajectory_claims(records, 1.0)[0].verdict == "pass"
    assert trajectory_claims(records, 1e-4)[0].verdict == "fail"
    assert mass_drift_rate([_record(0.0, mass=0.5)], 1.0) == 0.0
