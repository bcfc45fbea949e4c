"""Error hierarchy shared by every module.

Each error carries a machine-readable ``kind`` and the process exit code the
CLI uses when the error escapes a command.
"""
from typing import Any, Dict, Optional, Tuple


class LabError(Exception):
    """Base class for all laboratory errors."""

    kind: str = "error"
    exit_code: int = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Serialize for the error JSON written on standard error."""
        payload: Dict[str, Any] = {"kind": self.kind, "message": self.message}
        payload.update(
            {key: value for key, value in self.details.items() if value is not None}
        )
        return payload


class InvalidParametersError(LabError):
    kind = "invalid-parameters"


class DomainError(LabError):
    kind = "domain"


class ShapeError(LabError):
    kind = "shape"


class NumericError(LabError):
    kind = "numeric"


class UnsupportedOrderError(LabError):
    kind = "unsupported-order"


class ResolutionError(LabError):
    kind = "resolution"


class TruncationError(LabError):
    kind = "truncation"


class StateValidityError(LabError):
    """Density or turbulent energy fell below its floor."""

    kind = "state-validity"

    def __init__(
        self,
        message: str,
        field: str,
        index: Tuple[int, ...],
        position: Tuple[float, ...],
        value: float,
    ):
        super().__init__(
            message, field=field, index=list(index), position=list(position), value=value
        )
        self.field = field
        self.index = index
        self.position = position
        self.value = value


class RunAbortedError(LabError):
    """A run stopped early; ``snapshot`` names the last written state."""

    kind = "aborted"

    def __init__(self, message: str, snapshot: Optional[str] = None, **details: Any):
        super().__init__(message, snapshot=snapshot, **details)
        self.snapshot = snapshot


class InstabilityError(RunAbortedError):
    pass


class CoefficientTooSmallError(LabError):
    kind = "coefficient-too-small"


class InsufficientDataError(LabError):
    kind = "insufficient-data"


class ConfigParseError(LabError):
    kind = "config"
    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None, line: Any = None):
        super().__init__(message, key=key, line=line)
        self.key = key
        self.line = line


class LabIOError(LabError):
    kind = "io"
    exit_code = 2
