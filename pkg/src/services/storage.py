"""Run artifacts on disk: norms.csv, report.json and the output directory."""
import csv
import logging
from pathlib import Path
from typing import List, Optional, Union

from src.core.exceptions import LabIOError
from src.schemas.records import NORM_COLUMNS, NormRecord, Report

logger = logging.getLogger(__name__)

NORMS_FILE = "norms.csv"
REPORT_FILE = "report.json"
CONFIG_ECHO_FILE = "config.effective"

PathLike = Union[str, Path]


def format_value(value: float) -> str:
    return "%.17g" % value


def ensure_output_dir(path: PathLike) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise LabIOError(f"cannot create output directory {path}: {e}", path=str(path)) from e
    return path


class NormWriter:
    """Streams norm records to CSV, flushing every row.

    An aborted run therefore leaves every record written so far on disk.
    """

    def __init__(self, path: PathLike):
        self.path = Path(path)
        self._handle = None
        self._writer = None

    def __enter__(self) -> "NormWriter":
        try:
            self._handle = open(self.path, "w", encoding="utf-8", newline="")
        except OSError as e:
            raise LabIOError(f"cannot open {self.path}: {e}", path=str(self.path)) from e
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(NORM_COLUMNS)
        self._handle.flush()
        return self

    def write(self, record: NormRecord) -> None:
        self._writer.writerow([format_value(value) for value in record.as_row()])
        self._handle.flush()

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._handle is not None:
            self._handle.close()


def read_norms(path: PathLike) -> List[NormRecord]:
    """Load a norms.csv written by ``NormWriter``."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != NORM_COLUMNS:
                raise LabIOError(
                    f"{path} does not have the norms header {','.join(NORM_COLUMNS)}",
                    path=str(path),
                )
            records = []
            for row_idx, row in enumerate(reader):
                try:
                    records.append(NormRecord.from_row(row))
                except (TypeError, ValueError) as e:
                    raise LabIOError(
                        f"bad value in {path} row {row_idx + 1}: {e}", path=str(path)
                    ) from e
    except OSError as e:
        raise LabIOError(f"cannot read {path}: {e}", path=str(path)) from e
    logger.info(f"Loaded {len(records)} norm records from {path}")
    return records


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise LabIOError(f"cannot write {path}: {e}", path=str(path)) from e
    return path


def write_report(output_dir: Optional[PathLike], report: Report) -> Optional[Path]:
    if output_dir is None:
        return None
    path = write_text(ensure_output_dir(output_dir) / REPORT_FILE, report.to_json() + "\n")
    logger.info(f"Wrote report to {path}")
    return path
