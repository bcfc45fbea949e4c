"""Experiment runner orchestrating runs, verifications and reports."""
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.core.config import config as app_config
from src.core.exceptions import DomainError
from src.core.run_config import render_config
from src.linear.radial import RadialProfile, radial_acoustic_l2_norm, radial_l2_norm
from src.model.constants import (
    c1_bound,
    derive_constants,
    finite_power_rate,
    iteration_cap,
    sigma,
)
from src.model.state import PerturbationState
from src.schemas.params import DerivedConstants, RandomSmooth, RateQuery, RunConfig
from src.schemas.records import ClaimVerdict, NormRecord, Report, Trajectory
from src.services.analysis import (
    DEFAULT_R1,
    check_equivalence,
    default_convolution_lattice,
    dissipation_balance,
    fidelity_window,
    fit_exponent,
    theorem_report,
    trajectory_claims,
)
from src.services.integrator import TimeIntegrator
from src.services.storage import (
    CONFIG_ECHO_FILE,
    ensure_output_dir,
    read_norms,
    write_report,
    write_text,
)
from src.spectral.grid import Grid
from src.spectral.field import Field
from src.spectral.initial_data import bump_radius, make_initial_data
from src.spectral.norms import lp_size

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Whole-space radial rate checks: window, samples and two-sided tolerances
RADIAL_WINDOW = (10.0, 1000.0)
RADIAL_SAMPLES = 40
HEAT_TOLERANCE = 0.02
ACOUSTIC_TOLERANCE = 0.05

# Random states of the energy-functional equivalence sweep
EQUIVALENCE_SAMPLES = 100
EQUIVALENCE_GRID = (32, 32.0)
EQUIVALENCE_RECIPE = RandomSmooth(
    amplitude=1.0, decay_rate=4.0, window_fraction=0.1, delta=None
)
BALANCE_SAMPLES = 5


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def build_grid(run_config: RunConfig, threads: Optional[int] = None) -> Grid:
    return Grid(
        n=run_config.grid.n,
        box_length=run_config.grid.box_length,
        workers=threads or app_config.THREADS,
    )


def run_simulation(
    run_config: RunConfig,
    output_dir: Optional[PathLike] = None,
    nonlinear: Optional[bool] = None,
    threads: Optional[int] = None,
) -> Tuple[Trajectory, Dict[str, Any]]:
    """Integrate the perturbation system from the configured initial data.

    Args:
        run_config: Validated run configuration
        output_dir: Destination of norms.csv, snapshots and the config echo
        nonlinear: Overrides ``run.nonlinear`` when given
        threads: FFT workers; defaults to the process setting

    Returns:
        The trajectory and a summary dictionary
    """
    if nonlinear is not None and nonlinear != run_config.run.nonlinear:
        run_config = run_config.model_copy(
            update={"run": run_config.run.model_copy(update={"nonlinear": nonlinear})}
        )
    grid = build_grid(run_config, threads)
    constants = derive_constants(run_config.model)
    recipe = run_config.initial.build()
    initial = make_initial_data(grid, recipe, seed=run_config.run.seed)

    if output_dir is not None:
        out = ensure_output_dir(output_dir)
        write_text(out / CONFIG_ECHO_FILE, render_config(run_config))

    integrator = TimeIntegrator(
        grid,
        run_config.model,
        constants,
        run_config.run,
        energy_weight=run_config.analysis.energy_weight,
        floor_fraction=app_config.FLOOR_FRACTION,
    )
    trajectory = integrator.run(initial, output_dir)

    t_wrap = fidelity_window(grid, constants, bump_radius(recipe, grid))
    if run_config.run.t_end > t_wrap:
        logger.warning(
            f"t_end={run_config.run.t_end} lies beyond the fidelity window t_wrap={t_wrap:.4g}"
        )

    summary = {
        "timestamp": _timestamp(),
        "nonlinear": run_config.run.nonlinear,
        "scheme": run_config.run.scheme,
        "n": grid.n,
        "initial_size": lp_size(Field(grid, initial.data), run_config.analysis.p),
        "records": len(trajectory.entries),
        "t_end": trajectory.times[-1] if trajectory.entries else 0.0,
        "t_wrap": t_wrap,
        "gamma": constants.gamma,
        "lambda": constants.lam,
        "norms_path": trajectory.norms_path,
    }
    logger.info(f"Run completed: {summary}")
    return trajectory, summary


def initial_mass_scale(run_config: RunConfig, grid: Grid) -> float:
    """∫|a₀| of the configured initial data."""
    initial = make_initial_data(grid, run_config.initial.build(), seed=run_config.run.seed)
    return grid.physical_integral(np.abs(initial.a))


def run_report(
    run_config: RunConfig,
    records: List[NormRecord],
    grid: Grid,
    constants: DerivedConstants,
) -> Report:
    """Theorem verdicts plus mass and energy checks for one run."""
    t_wrap = fidelity_window(grid, constants, bump_radius(run_config.initial.build(), grid))
    report = theorem_report(records, run_config.analysis.p, run_config.analysis, t_wrap)
    if run_config.run.nonlinear:
        report.claims.extend(
            trajectory_claims(records, initial_mass_scale(run_config, grid))
        )
    return report


# Whole-space rate checks ------------------------------------------------------------


def _radial_claim(
    claim: str, times: np.ndarray, values: List[float], target: float, tolerance: float
) -> ClaimVerdict:
    fit = fit_exponent(times, values, RADIAL_WINDOW)
    verdict = "pass" if abs(fit.exponent + target) <= tolerance else "fail"
    logger.info(f"{claim}: fitted {fit.exponent:.4f} against -{target:.4f} -> {verdict}")
    return ClaimVerdict(
        claim=claim,
        target_exponent=target,
        fitted_exponent=fit.exponent,
        residual=fit.residual_rms,
        slack=tolerance,
        verdict=verdict,
    )


def radial_rate_claims(constants: DerivedConstants, width: float) -> List[ClaimVerdict]:
    """Two-sided exponent checks of S(t) and E(t) on Gaussian data in ℝ³."""
    times = np.geomspace(RADIAL_WINDOW[0], RADIAL_WINDOW[1], RADIAL_SAMPLES)
    density = RadialProfile.gaussian(width)
    potential = RadialProfile.gaussian_gradient(width)
    claims = []
    for l in (0, 1):
        target = sigma(RateQuery(p=1.0, q=2.0, l=l))
        heat = [radial_l2_norm(density, t, l, constants.lam) for t in times]
        claims.append(_radial_claim(f"heat_decay[l={l}]", times, heat, target, HEAT_TOLERANCE))
        acoustic = [
            radial_acoustic_l2_norm(density, potential, t, l, constants) for t in times
        ]
        claims.append(
            _radial_claim(
                f"acoustic_decay[l={l}]", times, acoustic, target, ACOUSTIC_TOLERANCE
            )
        )
    return claims


def verify_rates(
    run_config: RunConfig,
    output_dir: Optional[PathLike] = None,
    threads: Optional[int] = None,
) -> Report:
    """Radial semigroup rates plus the theorem claims of one box run.

    Args:
        run_config: Validated run configuration
        output_dir: Destination of run artifacts and report.json
        threads: FFT workers

    Returns:
        Report of kind ``rates``
    """
    constants = derive_constants(run_config.model)
    claims = radial_rate_claims(constants, run_config.initial.width)

    trajectory, summary = run_simulation(run_config, output_dir, threads=threads)
    grid = build_grid(run_config, threads)
    box = run_report(run_config, trajectory.records, grid, constants)
    claims.extend(box.claims)

    report = Report(
        kind="rates",
        claims=claims,
        details={
            "timestamp": summary["timestamp"],
            "radial_window": list(RADIAL_WINDOW),
            "box": box.details,
            "run": summary,
        },
    )
    write_report(output_dir, report)
    return report


# Constant checks ------------------------------------------------------------------


def _equivalence_states(seed: int, samples: int) -> List[PerturbationState]:
    n, box_length = EQUIVALENCE_GRID
    grid = Grid(n=n, box_length=box_length, workers=app_config.THREADS)
    return [
        make_initial_data(grid, EQUIVALENCE_RECIPE, seed=seed + index)
        for index in range(samples)
    ]


def verify_constants(
    run_config: RunConfig,
    output_dir: Optional[PathLike] = None,
    seed: int = 0,
    samples: int = EQUIVALENCE_SAMPLES,
) -> Report:
    """Convolution-inequality lattice and the energy-functional equivalence sweep.

    Args:
        run_config: Supplies the model and the energy weight
        output_dir: Where report.json goes
        seed: First seed of the random states
        samples: Number of random states

    Returns:
        Report of kind ``constants``
    """
    lattice = default_convolution_lattice()
    claims = [
        ClaimVerdict(
            claim="convolution_bound",
            value=lattice.max_ratio,
            slack=1.0,
            verdict="pass" if lattice.passed else "fail",
        )
    ]
    logger.info(
        f"Convolution bound: max ratio {lattice.max_ratio:.6f} over "
        f"{len(lattice.entries)} lattice points"
    )

    coefficient = run_config.analysis.energy_weight
    states = _equivalence_states(seed, samples)
    measured = check_equivalence(states, coefficient)
    claims.append(
        ClaimVerdict(
            claim="energy_equivalence",
            value=measured,
            slack=0.0,
            verdict="pass" if math.isfinite(measured) else "fail",
        )
    )

    constants = derive_constants(run_config.model)
    balances = [
        dissipation_balance(
            state, run_config.model, constants, coefficient, nonlinear=False
        ).constant
        for state in states[:BALANCE_SAMPLES]
    ]

    report = Report(
        kind="constants",
        claims=claims,
        details={
            "timestamp": _timestamp(),
            "seed": seed,
            "samples": samples,
            "energy_weight": coefficient,
            "lattice": [entry.model_dump() for entry in lattice.entries],
            "dissipation_constants": balances,
        },
    )
    write_report(output_dir, report)
    return report


# Reports and tables -----------------------------------------------------------------


def report_from_norms(
    run_config: RunConfig, norms_path: PathLike, output_dir: Optional[PathLike] = None
) -> Report:
    """Theorem report for an existing norms.csv."""
    records = read_norms(norms_path)
    grid = build_grid(run_config)
    constants = derive_constants(run_config.model)
    report = run_report(run_config, records, grid, constants)
    report.details["norms_path"] = str(norms_path)
    write_report(output_dir, report)
    return report


def rate_tables(p: float = 1.0, q: float = 2.0, l: int = 0, n_max: int = 6) -> Dict[str, Any]:
    """σ for one query plus the σ, C₁ and N tables printed by ``rates``."""
    tables: Dict[str, Any] = {
        "sigma": sigma(RateQuery(p=p, q=q, l=l)),
        "query": {"p": p, "q": q, "l": l},
        "sigma_table": [
            {"q": qq, "l": ll, "sigma": sigma(RateQuery(p=p, q=qq, l=ll))}
            for qq in (2.0, 3.0, 6.0, math.inf)
            if qq >= p
            for ll in (0, 1, 2)
        ],
        "c1_table": [
            {"r1": r1, "r2": r2, "c1": c1_bound(r1, r2)}
            for r1 in DEFAULT_R1
            for r2 in (0.0, r1 / 2.0, r1)
        ],
        "iteration_table": [],
    }
    try:
        for n in range(1, n_max + 1):
            cap = iteration_cap(n, p)
            tables["iteration_table"].append(
                {
                    "n": n,
                    "cap": cap.value,
                    "admissible": cap.admissible,
                    "rate": finite_power_rate(n, p),
                }
            )
    except DomainError as e:
        # p outside the theorem range still gets σ and C₁
        logger.warning(f"No iteration table for p={p}: {e}")
    return tables
