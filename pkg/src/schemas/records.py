"""Pydantic schemas for norm records, fits and verdict reports."""
import json
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

# Fixed CSV layout of norms.csv
NORM_COLUMNS = ("t", "l2", "l3", "l6", "linf", "h2grad", "dtl2", "M", "mass")

Verdict = Literal["pass", "fail"]


class NormRecord(BaseModel):
    """One time-stamped entry of the norm battery."""

    model_config = ConfigDict(frozen=True)

    t: float
    l2: float
    l3: float
    l6: float
    linf: float
    h2grad: float
    dtl2: float
    energy: float
    mass: float

    def as_row(self) -> List[float]:
        return [
            self.t,
            self.l2,
            self.l3,
            self.l6,
            self.linf,
            self.h2grad,
            self.dtl2,
            self.energy,
            self.mass,
        ]

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "NormRecord":
        values = {key: float(row[key]) for key in NORM_COLUMNS}
        values["energy"] = values.pop("M")
        return cls(**values)


class FitResult(BaseModel):
    """Least-squares slope of log(value) against log(1+t)."""

    model_config = ConfigDict(frozen=True)

    exponent: float
    intercept: float
    window_start: float
    window_end: float
    residual_rms: float
    samples: int


class ClaimVerdict(BaseModel):
    """Outcome of one checked claim; ``value`` holds non-exponent measurements."""

    claim: str
    target_exponent: Optional[float] = None
    value: Optional[float] = None
    fitted_exponent: Optional[float] = None
    residual: Optional[float] = None
    slack: float
    verdict: Verdict
    degenerate: bool = False


class Report(BaseModel):
    """Versioned verdict report written as report.json."""

    schema_version: int = Field(default=1, serialization_alias="schema")
    kind: str
    claims: List[ClaimVerdict] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(claim.verdict == "pass" for claim in self.claims)

    def to_json(self) -> str:
        payload = self.model_dump(by_alias=True)
        payload["passed"] = self.passed
        return json.dumps(payload, indent=2, sort_keys=False)


class TrajectoryEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: int
    record: NormRecord
    snapshot: Optional[str] = None


class Trajectory(BaseModel):
    """Norm records of one run, first entry at t=0, times strictly increasing."""

    entries: List[TrajectoryEntry] = Field(default_factory=list)
    norms_path: Optional[str] = None

    @property
    def records(self) -> List[NormRecord]:
        return [entry.record for entry in self.entries]

    @property
    def times(self) -> List[float]:
        return [entry.record.t for entry in self.entries]

    def column(self, name: str) -> List[float]:
        field = "energy" if name == "M" else name
        return [getattr(entry.record, field) for entry in self.entries]


class ConvolutionBoundEntry(BaseModel):
    r1: float
    r2: float
    t: float
    lhs: float
    bound: float
    ratio: float


class ConvolutionBoundReport(BaseModel):
    """Ratios LHS/(C₁(r₁,r₂)(1+t)^{−r₂}) over a lattice; passes iff all ≤ 1."""

    entries: List[ConvolutionBoundEntry] = Field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        return max((entry.ratio for entry in self.entries), default=0.0)

    @property
    def passed(self) -> bool:
        return all(entry.ratio <= 1.0 for entry in self.entries)


class DissipationBalance(BaseModel):
    """One-state evaluation of the energy dissipation inequality."""

    model_config = ConfigDict(frozen=True)

    rate: float
    dissipation: float
    gradient_squared: float
    constant: Optional[float] = None
