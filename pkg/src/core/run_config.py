"""Flat ``section.key=value`` run configuration files.

Every accepted key, with its type, default and description, is listed in
``CONFIG_DEFAULTS``; parsed values are validated by the pydantic models in
``src.schemas.params``.
"""
import logging
from typing import Any, Dict, Iterable, List, Optional, Tuple

from pydantic import ValidationError

from src.core.exceptions import ConfigParseError, InvalidParametersError
from src.model.constants import derive_constants
from src.schemas.params import RunConfig

logger = logging.getLogger(__name__)

# key: (type, default, description)
CONFIG_DEFAULTS: Dict[str, Tuple[type, Any, str]] = {
    "grid.n": (int, 64, "points per axis (even, >= 4)"),
    "grid.box_length": (float, 100.0, "side L of the periodic box"),
    "model.rho_bar": (float, 0.2, "reference density"),
    "model.k_bar": (float, 1.0, "reference turbulent kinetic energy"),
    "model.mu": (float, 1.0, "dynamic viscosity"),
    "model.mu_t": (float, 0.5, "eddy viscosity"),
    "model.c1": (float, 1.44, "production constant C1"),
    "model.c2": (float, 1.92, "dissipation constant C2"),
    "model.pressure_exponent": (float, 1.4, "exponent g of p = kappa*rho^g"),
    "model.pressure_coefficient": (float, 1.0, "coefficient kappa of p = kappa*rho^g"),
    "run.dt": (float, 0.25, "base time step"),
    "run.t_end": (float, 25.0, "final time"),
    "run.output_stride": (int, 1, "steps between norm records"),
    "run.snapshot_stride": (int, 0, "steps between snapshots (0: none)"),
    "run.cfl_safety": (float, 0.5, "advective CFL factor in (0, 1]"),
    "run.scheme": (str, "if-rk2", "if-rk2 or etd-rk2"),
    "run.nonlinear": (bool, True, "include the forcing terms"),
    "run.delta_warn": (float, 0.05, "warn when the initial H3 size exceeds this"),
    "run.instability_factor": (float, 10.0, "abort when the L2 norm grows by this factor"),
    "run.seed": (int, 0, "seed of random initial data"),
    "initial.recipe": (str, "gaussian-bump", "gaussian-bump or random-smooth"),
    "initial.amplitude": (float, 1e-3, "amplitude before H3 normalisation"),
    "initial.delta": (float, 1e-3, "target H3 size (0: keep the amplitude)"),
    "initial.width": (float, 3.0, "Gaussian bump width"),
    "initial.decay_rate": (float, 4.0, "spectral damping of random-smooth data"),
    "initial.window_fraction": (float, 0.125, "random-smooth window width over L"),
    "initial.weight_a": (float, 1.0, "weight of a"),
    "initial.weight_v": (float, 1.0, "weight of each v component"),
    "initial.weight_h": (float, 1.0, "weight of h"),
    "initial.weight_m": (float, 1.0, "weight of m"),
    "initial.weight_eps": (float, 0.01, "weight of eps"),
    "analysis.p": (float, 1.0, "Lebesgue exponent of the initial data, in [1, 6/5)"),
    "analysis.slack": (float, 0.1, "one-sided slack of decay claims"),
    "analysis.sup_slack": (float, 0.15, "slack of the sup-norm claim"),
    "analysis.window_start": (float, 5.0, "start of the fitting window"),
    "analysis.window_end": (float, 50.0, "end of the fitting window"),
    "analysis.min_window_ratio": (float, 2.0, "minimal (1+t1)/(1+t0) of the window"),
    "analysis.energy_weight": (float, 10.0, "weight C1 of the energy functional"),
}

# Dotted keys whose place in RunConfig differs from the flat name
_NESTED = {
    "model.pressure_exponent": ("model", "pressure", "exponent"),
    "model.pressure_coefficient": ("model", "pressure", "coefficient"),
}
_FLAT = {path: key for key, path in _NESTED.items()}

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def _convert(key: str, raw: str, line: Optional[int]) -> Any:
    kind = CONFIG_DEFAULTS[key][0]
    try:
        if kind is bool:
            lowered = raw.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as e:
        raise ConfigParseError(
            f"{key}: expected {kind.__name__}, got {raw!r}", key=key, line=line
        ) from e


def _split(entry: str, line: Optional[int]) -> Tuple[str, str]:
    if "=" not in entry:
        raise ConfigParseError(f"expected key=value, got {entry!r}", line=line)
    key, raw = entry.split("=", 1)
    key, raw = key.strip(), raw.strip()
    if key not in CONFIG_DEFAULTS:
        raise ConfigParseError(f"unknown key {key!r}", key=key, line=line)
    return key, raw


def _path(key: str) -> Tuple[str, ...]:
    return _NESTED.get(key, tuple(key.split(".")))


def _error_key(loc: Iterable[Any]) -> Optional[str]:
    parts = tuple(str(part) for part in loc)
    for length in range(len(parts), 0, -1):
        head = parts[:length]
        if head in _FLAT:
            return _FLAT[head]
        dotted = ".".join(head)
        if dotted in CONFIG_DEFAULTS:
            return dotted
    return ".".join(parts) or None


def parse_config(text: str, overrides: Iterable[str] = ()) -> RunConfig:
    """Parse configuration text, then apply ``key=value`` overrides.

    Raises:
        ConfigParseError: unknown key, type mismatch, or violated invariant,
            naming the key and the line (``None`` for overrides)
    """
    values: Dict[str, Any] = {}
    lines: Dict[str, Optional[int]] = {}

    for number, raw_line in enumerate(text.splitlines(), start=1):
        entry = raw_line.split("#", 1)[0].strip()
        if not entry:
            continue
        key, raw = _split(entry, number)
        values[key] = _convert(key, raw, number)
        lines[key] = number

    for override in overrides:
        key, raw = _split(override, None)
        values[key] = _convert(key, raw, None)
        lines[key] = None

    nested: Dict[str, Any] = {}
    for key, value in values.items():
        target = nested
        *parents, leaf = _path(key)
        for parent in parents:
            target = target.setdefault(parent, {})
        target[leaf] = value

    try:
        config = RunConfig.model_validate(nested)
    except ValidationError as e:
        error = e.errors()[0]
        key = _error_key(error["loc"])
        raise ConfigParseError(
            f"{key}: {error['msg']}", key=key, line=lines.get(key) if key else None
        ) from e

    logger.debug(f"Parsed configuration with {len(values)} explicit keys")
    return config


def config_values(config: RunConfig) -> Dict[str, Any]:
    """Flat dotted-key view of a configuration, in table order."""
    dumped = config.model_dump()
    flat: Dict[str, Any] = {}
    for key in CONFIG_DEFAULTS:
        value: Any = dumped
        for part in _path(key):
            value = value[part]
        flat[key] = value
    return flat


def _render_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def render_config(config: RunConfig) -> str:
    """Effective configuration text; parsing it gives back ``config``."""
    out: List[str] = ["# effective configuration"]
    try:
        derived = derive_constants(config.model)
        out.append(f"# derived.gamma = {derived.gamma!r}")
        out.append(f"# derived.lambda = {derived.lam!r}")
    except InvalidParametersError as e:
        out.append(f"# derived constants unavailable: {e.message}")
    for key, value in config_values(config).items():
        out.append(f"{key}={_render_value(value)}")
    return "\n".join(out) + "\n"
