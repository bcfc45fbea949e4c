"""Pydantic schemas for model parameters and run configuration."""
from typing import Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

FieldWeights = Tuple[float, float, float, float, float]


class PressureLaw(BaseModel):
    """Barotropic pressure p(ρ) = κ·ρ^g.

    Subclass and override ``value``/``derivative`` to plug in another law.
    """

    model_config = ConfigDict(frozen=True)

    coefficient: float = Field(1.0, gt=0)
    exponent: float = Field(1.4, gt=0)

    def value(self, rho):
        return self.coefficient * np.power(rho, self.exponent)

    def derivative(self, rho):
        return self.coefficient * self.exponent * np.power(rho, self.exponent - 1.0)


class ModelParams(BaseModel):
    """Physical constants of the turbulent flow system.

    ``k_bar`` is only checked through p'(ρ̄) + k̄ > 0 in ``derive_constants``;
    the nonlinear terms additionally need k̄ > 0.
    """

    model_config = ConfigDict(frozen=True)

    rho_bar: float = Field(0.2, gt=0)
    k_bar: float = 1.0
    mu: float = Field(1.0, gt=0)
    mu_t: float = Field(0.5, gt=0)
    c1: float = Field(1.44, gt=0)
    c2: float = Field(1.92, gt=0)
    pressure: PressureLaw = Field(default_factory=PressureLaw)

    @property
    def mu_e(self) -> float:
        return self.mu + self.mu_t


class DerivedConstants(BaseModel):
    """Sound-like speed γ and inverse reference density λ."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(gt=0)
    lam: float = Field(gt=0)

    @property
    def gamma_lambda(self) -> float:
        return self.gamma * self.lam


class RateQuery(BaseModel):
    """Arguments of the decay exponent σ(p, q; l); checked by ``sigma``."""

    model_config = ConfigDict(frozen=True)

    p: float
    q: float
    l: int = 0


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = 64
    box_length: float = Field(100.0, gt=0)

    @field_validator("n")
    @classmethod
    def _even_and_large_enough(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError("N must be even and at least 4")
        return value


class GaussianBump(BaseModel):
    """a(x) = A·exp(−|x−c|²/(2w²)), weighted per field group."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["gaussian-bump"] = "gaussian-bump"
    amplitude: float = 1e-3
    width: float = Field(3.0, gt=0)
    center: Optional[Tuple[float, float, float]] = None
    # Target ‖W₀‖_{H³}; when set the amplitude is rescaled to reach it
    delta: Optional[float] = Field(None, gt=0)
    weights: FieldWeights = (1.0, 1.0, 1.0, 1.0, 1.0)


class RandomSmooth(BaseModel):
    """Seeded white noise, spectrally damped by exp(−decay·|ξ|²) and windowed."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["random-smooth"] = "random-smooth"
    amplitude: float = 1e-3
    decay_rate: float = Field(4.0, gt=0)
    delta: Optional[float] = Field(None, gt=0)
    weights: FieldWeights = (1.0, 1.0, 1.0, 1.0, 1.0)
    # Width of the Gaussian window as a fraction of the box length
    window_fraction: float = Field(0.125, gt=0, le=0.25)


InitialRecipe = Union[GaussianBump, RandomSmooth]


class InitialDataSpec(BaseModel):
    """Flat ``initial.*`` section of a run configuration."""

    model_config = ConfigDict(frozen=True)

    recipe: Literal["gaussian-bump", "random-smooth"] = "gaussian-bump"
    amplitude: float = 1e-3
    delta: float = Field(1e-3, ge=0)
    width: float = Field(3.0, gt=0)
    decay_rate: float = Field(4.0, gt=0)
    window_fraction: float = Field(0.125, gt=0, le=0.25)
    weight_a: float = 1.0
    weight_v: float = 1.0
    weight_h: float = 1.0
    weight_m: float = 1.0
    weight_eps: float = 0.01

    def build(self) -> InitialRecipe:
        weights = (
            self.weight_a,
            self.weight_v,
            self.weight_h,
            self.weight_m,
            self.weight_eps,
        )
        delta = self.delta or None
        if self.recipe == "gaussian-bump":
            return GaussianBump(
                amplitude=self.amplitude, width=self.width, delta=delta, weights=weights
            )
        return RandomSmooth(
            amplitude=self.amplitude,
            decay_rate=self.decay_rate,
            window_fraction=self.window_fraction,
            delta=delta,
            weights=weights,
        )


class RunSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    dt: float = Field(0.25, gt=0)
    t_end: float = Field(25.0, gt=0)
    output_stride: int = Field(1, ge=1)
    snapshot_stride: int = Field(0, ge=0)
    cfl_safety: float = Field(0.5, gt=0, le=1)
    scheme: Literal["if-rk2", "etd-rk2"] = "if-rk2"
    nonlinear: bool = True
    delta_warn: float = Field(0.05, gt=0)
    instability_factor: float = Field(10.0, gt=1)
    seed: int = Field(0, ge=0)


class AnalysisSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: float = Field(1.0, ge=1, lt=1.2)
    slack: float = Field(0.1, ge=0)
    sup_slack: float = Field(0.15, ge=0)
    window_start: float = Field(5.0, ge=0)
    window_end: float = Field(50.0, gt=0)
    min_window_ratio: float = Field(2.0, ge=1)
    energy_weight: float = Field(10.0, gt=0)

    @model_validator(mode="after")
    def _ordered_window(self) -> "AnalysisSettings":
        if self.window_end <= self.window_start:
            raise ValueError("window_end must exceed window_start")
        return self


class RunConfig(BaseModel):
    """Fully validated run configuration."""

    model_config = ConfigDict(frozen=True)

    grid: GridSpec = Field(default_factory=GridSpec)
    model: ModelParams = Field(default_factory=ModelParams)
    run: RunSettings = Field(default_factory=RunSettings)
    initial: InitialDataSpec = Field(default_factory=InitialDataSpec)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)
