"""Command-line entry point of the laboratory."""
import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from src.core.config import config as app_config
from src.core.exceptions import LabError, LabIOError
from src.core.logging_config import setup_logging
from src.core.run_config import parse_config
from src.experiments.runner import (
    rate_tables,
    report_from_norms,
    run_simulation,
    verify_constants,
    verify_rates,
)
from src.schemas.params import RunConfig
from src.schemas.records import Report
from src.services.storage import NORMS_FILE

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "rates",
    "run-linear",
    "run-nonlinear",
    "verify-rates",
    "verify-constants",
    "report",
)


def _exponent(raw: str) -> float:
    value = float(raw)
    if math.isnan(value):
        raise argparse.ArgumentTypeError("exponent must be a number")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration file")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=int, help="seed of random initial data")
    common.add_argument("--threads", type=int, help="FFT workers")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )

    parser = argparse.ArgumentParser(
        prog="turbulent-decay-lab",
        description="Decay-rate laboratory for the compressible k-epsilon system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rates = sub.add_parser("rates", parents=[common], help="print sigma, C1 and N tables")
    rates.add_argument("--p", type=_exponent, default=1.0)
    rates.add_argument("--q", type=_exponent, default=2.0, help="'inf' for the sup norm")
    rates.add_argument("--l", type=int, default=0)
    rates.add_argument("--n-max", type=int, default=6)

    sub.add_parser("run-linear", parents=[common], help="linear box run")
    sub.add_parser("run-nonlinear", parents=[common], help="nonlinear box run")
    sub.add_parser("verify-rates", parents=[common], help="radial and box rate checks")
    sub.add_parser(
        "verify-constants", parents=[common], help="convolution lattice and energy equivalence"
    )
    report = sub.add_parser("report", parents=[common], help="report.json from norms.csv")
    report.add_argument("--norms", type=Path, help="norms.csv (default: OUT/norms.csv)")
    return parser


def load_config(path: Optional[Path], overrides: Sequence[str], seed: Optional[int]) -> RunConfig:
    text = ""
    if path is not None:
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise LabIOError(f"cannot read config {path}: {e}", path=str(path)) from e
    extra: List[str] = list(overrides)
    if seed is not None:
        extra.append(f"run.seed={seed}")
    return parse_config(text, extra)


def _format_tables(tables: Dict[str, Any]) -> str:
    lines = ["%.17g" % tables["sigma"], "", "# sigma(p, q; l)", "q,l,sigma"]
    lines += [f"{row['q']:g},{row['l']},{row['sigma']:.17g}" for row in tables["sigma_table"]]
    lines += ["", "# C1(r1, r2)", "r1,r2,c1"]
    lines += [f"{row['r1']:g},{row['r2']:g},{row['c1']:.17g}" for row in tables["c1_table"]]
    if tables["iteration_table"]:
        lines += ["", "# N(n, p)", "n,cap,admissible,rate"]
        lines += [
            f"{row['n']},{row['cap']},{str(row['admissible']).lower()},{row['rate']:.17g}"
            for row in tables["iteration_table"]
        ]
    return "\n".join(lines)


def _emit_report(report: Report) -> int:
    print(report.to_json())
    return 0 if report.passed else 1


def dispatch(args: argparse.Namespace) -> int:
    """Run one subcommand and return the process exit status."""
    if args.command == "rates":
        tables = rate_tables(args.p, args.q, args.l, args.n_max)
        print(_format_tables(tables))
        return 0

    run_config = load_config(args.config, args.overrides, args.seed)
    out = args.out or Path(app_config.OUTPUT_DIR)
    logger.info(f"Dispatching {args.command}", extra={"output_dir": str(out)})

    if args.command in ("run-linear", "run-nonlinear"):
        _, summary = run_simulation(
            run_config,
            out,
            nonlinear=args.command == "run-nonlinear",
            threads=args.threads,
        )
        print(json.dumps(summary, indent=2, default=str))
        return 0
    if args.command == "verify-rates":
        return _emit_report(verify_rates(run_config, out, threads=args.threads))
    if args.command == "verify-constants":
        seed = args.seed if args.seed is not None else run_config.run.seed
        return _emit_report(verify_constants(run_config, out, seed=seed))
    norms = args.norms or out / NORMS_FILE
    return _emit_report(report_from_norms(run_config, norms, out))


def main(argv: Optional[Sequence[str]] = None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args)
    except LabError as e:
        logger.error(f"{args.command} failed: {e.message}")
        print(json.dumps(e.to_dict(), default=str), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        print(json.dumps({"kind": "internal", "message": str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
