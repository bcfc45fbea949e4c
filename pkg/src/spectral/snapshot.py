"""TDK1 binary snapshots.

Layout: a little-endian header ``<4sIddI`` (magic, N, L, t, field count)
followed by every field's samples as float64 in row-major order.
"""
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.core.exceptions import LabIOError
from src.model.state import COMPONENTS, PerturbationState
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)

MAGIC = b"TDK1"
HEADER = struct.Struct("<4sIddI")

PathLike = Union[str, Path]


def write_snapshot(path: PathLike, state: PerturbationState) -> Path:
    path = Path(path)
    grid = state.grid
    header = HEADER.pack(MAGIC, grid.n, grid.box_length, state.t, COMPONENTS)
    try:
        with open(path, "wb") as handle:
            handle.write(header)
            handle.write(np.ascontiguousarray(state.data, dtype="<f8").tobytes())
    except OSError as e:
        raise LabIOError(f"cannot write snapshot {path}: {e}", path=str(path)) from e
    logger.debug(f"Wrote snapshot {path} at t={state.t}")
    return path


def read_snapshot(path: PathLike, workers: int = 1) -> PerturbationState:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise LabIOError(f"cannot read snapshot {path}: {e}", path=str(path)) from e

    if len(raw) < HEADER.size:
        raise LabIOError(f"snapshot {path} is truncated", path=str(path))
    magic, n, box_length, t, count = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise LabIOError(f"{path} is not a TDK1 snapshot", path=str(path))
    if count != COMPONENTS:
        raise LabIOError(
            f"snapshot {path} holds {count} fields, expected {COMPONENTS}", path=str(path)
        )

    expected = count * n**3 * 8
    payload = raw[HEADER.size:]
    if len(payload) != expected:
        raise LabIOError(
            f"snapshot {path} has {len(payload)} data bytes, expected {expected}",
            path=str(path),
        )
    data = np.frombuffer(payload, dtype="<f8").reshape((count, n, n, n)).astype(float)
    return PerturbationState(Grid(n, box_length, workers=workers), data, t)
