"""Time integration of the perturbation system W_t = A·W + F(W).

The linear part is handled exactly by the per-mode propagator; only the
forcing F is treated explicitly, with one of two second-order schemes:

* ``if-rk2``: integrating-factor Heun,
  W* = P(W + dt·F(W)),  W⁺ = P·W + dt/2·(P·F(W) + F(W*)).
* ``etd-rk2``: exponential time differencing,
  W* = e^{dtA}W + dt·φ₁(dtA)F(W),  W⁺ = W* + dt·φ₂(dtA)(F(W*) − F(W)).
"""
import logging
import math
from contextlib import nullcontext
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from src.core.exceptions import InstabilityError, NumericError, StateValidityError
from src.linear.propagator import LinearPropagator
from src.model.state import PerturbationState
from src.nonlinear.rhs import NonlinearForcing
from src.schemas.params import DerivedConstants, ModelParams, RunSettings
from src.schemas.records import NormRecord, Trajectory, TrajectoryEntry
from src.services.analysis import norm_battery
from src.services.storage import NORMS_FILE, NormWriter, ensure_output_dir
from src.spectral.grid import Grid
from src.spectral.initial_data import h3_size
from src.spectral.snapshot import write_snapshot

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class TimeIntegrator:
    """Advances spectral states of one grid with a fixed base step."""

    def __init__(
        self,
        grid: Grid,
        params: ModelParams,
        constants: DerivedConstants,
        settings: RunSettings,
        energy_weight: float = 10.0,
        floor_fraction: Optional[float] = None,
    ):
        self.grid = grid
        self.params = params
        self.constants = constants
        self.settings = settings
        self.energy_weight = energy_weight
        self.floor_fraction = floor_fraction
        self.propagator = LinearPropagator(grid, constants)
        self.forcing = (
            NonlinearForcing(grid, params, constants, floor_fraction)
            if settings.nonlinear
            else None
        )

    # Single steps ---------------------------------------------------------

    def _forcing(self, coeffs: np.ndarray) -> np.ndarray:
        if self.forcing is None:
            return np.zeros_like(coeffs)
        return self.forcing(coeffs)

    def advance(self, coeffs: np.ndarray, dt: float) -> np.ndarray:
        """One step of the configured scheme on spectral coefficients."""
        apply = self.propagator.apply
        f0 = self._forcing(coeffs)
        if self.settings.scheme == "etd-rk2":
            predictor = apply(coeffs, dt) + dt * apply(f0, dt, "phi1")
            f1 = self._forcing(predictor)
            return predictor + dt * apply(f1 - f0, dt, "phi2")

        propagated = apply(coeffs, dt)
        propagated_f0 = apply(f0, dt)
        predictor = propagated + dt * propagated_f0
        f1 = self._forcing(predictor)
        return propagated + 0.5 * dt * (propagated_f0 + f1)

    def step(self, state: PerturbationState, dt: float) -> PerturbationState:
        coeffs = self.advance(state.spectral(), dt)
        return PerturbationState(self.grid, self.grid.backward(coeffs), state.t + dt)

    def cfl_step(self, state: PerturbationState) -> float:
        """Largest step allowed by the advective CFL condition."""
        speed = max(
            self.constants.gamma,
            self.constants.gamma_lambda * float(np.sqrt(np.sum(state.v**2, axis=0)).max()),
        )
        return self.settings.cfl_safety * self.grid.spacing / speed

    def substeps(self, state: PerturbationState, dt: float) -> int:
        if self.forcing is None:
            return 1
        return max(1, math.ceil(dt / self.cfl_step(state) - 1e-12))

    def advance_interval(
        self, coeffs: np.ndarray, state: PerturbationState, interval: float
    ) -> Tuple[np.ndarray, int]:
        """Cover ``interval`` in equal CFL-limited substeps.

        The limit is checked again before every further substep and the rest
        of the interval is split more finely when the velocity has grown.

        Returns:
            The advanced coefficients and the number of substeps taken
        """
        pending = self.substeps(state, interval)
        h = interval / pending
        taken = 0
        while pending > 0:
            if taken:
                current = PerturbationState(self.grid, self.grid.backward(coeffs))
                needed = self.substeps(current, pending * h)
                if needed > pending:
                    h = pending * h / needed
                    pending = needed
            coeffs = self.advance(coeffs, h)
            pending -= 1
            taken += 1
        return coeffs, taken

    def step_size(self, n: int, n_steps: int) -> float:
        """Base step, except a last step shortened to land on ``t_end``."""
        dt = self.settings.dt
        if n < n_steps:
            return dt
        last = self.settings.t_end - (n_steps - 1) * dt
        return dt if abs(last - dt) <= 1e-9 * dt else last

    # Runs -----------------------------------------------------------------

    def _record(self, state: PerturbationState) -> NormRecord:
        return norm_battery(
            state,
            self.params,
            self.constants,
            self.energy_weight,
            nonlinear=self.settings.nonlinear,
            floor_fraction=self.floor_fraction,
        )

    def _diagnostic_snapshot(
        self, output_dir: Optional[Path], state: PerturbationState, step: int
    ) -> Optional[str]:
        if output_dir is None:
            return None
        path = output_dir / f"snap_{step:06d}_last_stable.tdk"
        return str(write_snapshot(path, state))

    def run(
        self, initial: PerturbationState, output_dir: Optional[PathLike] = None
    ) -> Trajectory:
        """Advance ``initial`` to ``t_end`` recording the norm battery.

        Args:
            initial: State at t=0
            output_dir: Where norms.csv and snapshots go; nothing is written if None

        Returns:
            Trajectory with one entry per recorded step
        """
        settings = self.settings
        dt = settings.dt
        n_steps = max(1, math.ceil(settings.t_end / dt - 1e-9))
        out = ensure_output_dir(output_dir) if output_dir is not None else None

        size = h3_size(initial)
        if size > settings.delta_warn:
            logger.warning(
                f"Initial H3 size {size:.3e} exceeds the small-data threshold "
                f"{settings.delta_warn:.3e}"
            )

        logger.info(
            "Starting run",
            extra={
                "n": self.grid.n,
                "steps": n_steps,
                "dt": dt,
                "scheme": settings.scheme,
                "nonlinear": settings.nonlinear,
            },
        )

        state = initial.with_time(0.0)
        coeffs = state.spectral()
        initial_l2 = math.sqrt(self.grid.spectral_l2_squared(coeffs))
        entries: List[TrajectoryEntry] = []
        norms_path = str(out / NORMS_FILE) if out is not None else None

        with NormWriter(norms_path) if norms_path else nullcontext() as writer:

            def record(current: PerturbationState, step: int, snapshot: bool) -> None:
                entry_record = self._record(current)
                snapshot_path = None
                if snapshot and out is not None:
                    snapshot_path = str(write_snapshot(out / f"snap_{step:06d}.tdk", current))
                entries.append(
                    TrajectoryEntry(step=step, record=entry_record, snapshot=snapshot_path)
                )
                if writer:
                    writer.write(entry_record)

            record(state, 0, settings.snapshot_stride > 0)

            for n in range(1, n_steps + 1):
                previous = state
                t_next = settings.t_end if n == n_steps else n * dt
                try:
                    coeffs, sub = self.advance_interval(
                        coeffs, previous, self.step_size(n, n_steps)
                    )
                    state = PerturbationState(self.grid, self.grid.backward(coeffs), t_next)
                except StateValidityError as e:
                    e.details["snapshot"] = self._diagnostic_snapshot(out, previous, n - 1)
                    e.details["t"] = previous.t
                    logger.error(f"Validity check failed at step {n}: {e}", exc_info=True)
                    raise
                except NumericError as e:
                    snapshot = self._diagnostic_snapshot(out, previous, n - 1)
                    logger.error(f"Non-finite state at step {n}: {e}")
                    raise InstabilityError(
                        f"non-finite values at t={t_next}", snapshot=snapshot, step=n
                    ) from e

                if sub > 1:
                    logger.warning(
                        f"CFL limit split step {n} into {sub} substeps",
                        extra={"step": n, "substeps": sub},
                    )

                l2 = math.sqrt(self.grid.spectral_l2_squared(coeffs))
                if initial_l2 > 0 and l2 > settings.instability_factor * initial_l2:
                    snapshot = self._diagnostic_snapshot(out, previous, n - 1)
                    logger.error(
                        f"L2 norm grew from {initial_l2:.3e} to {l2:.3e}",
                        extra={"step": n, "t": state.t},
                    )
                    raise InstabilityError(
                        f"L2 norm grew by more than {settings.instability_factor}x "
                        f"at t={state.t}",
                        snapshot=snapshot,
                        step=n,
                        growth=l2 / initial_l2,
                    )

                if n % settings.output_stride == 0 or n == n_steps:
                    snap = settings.snapshot_stride > 0 and (
                        n % settings.snapshot_stride == 0 or n == n_steps
                    )
                    record(state, n, snap)
                    logger.debug("Recorded norms", extra={"step": n, "t": state.t})
        logger.info(f"Run finished at t={state.t} after {n_steps} steps")
        return Trajectory(entries=entries, norms_path=norms_path)
