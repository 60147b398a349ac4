"""Command-line interface: ``bellstat analyze | simulate | optimize | noneq``.

Exit codes: 0 success, 2 input or usage error, 3 degenerate statistics.
"""

from __future__ import annotations

import argparse
import math
import os
import secrets
import sys
import warnings
from typing import Any, Sequence

from . import __version__
from .counts import ExperimentSeries, aggregate, read_series, serialize_series
from .errors import BellStatError, DegenerateError, InsufficientDataError
from .inequalities import (
    DRIFT_NOTE,
    SINGLES_RULES,
    drift_normalize,
    equivalence_check,
    inequality_report,
)
from .nonequivalence import demo_row
from .reports import dumps, format_number, render_text
from .significance import block_stats, significance_report
from .simulator import BACKGROUND_NOTE, CANONICAL_ANGLES_DEG, SimConfig, SourceModel, optimize_eberhard, simulate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

DEFAULT_LEVEL = 0.9995
SEED_ENV = "BELLSTAT_SEED"


class UsageError(BellStatError):
    pass


def _stats_section(values: list[float], level: float, threshold: float, direction: str):
    """Significance dict, or None if fewer than two blocks."""
    try:
        stats = block_stats(values)
    except InsufficientDataError:
        return None
    return significance_report(stats, level, threshold, direction)


def _t_section(series: ExperimentSeries, rows: list[dict], level: float, singles_rule: str, normalized: bool):
    defined = [row["t"] for row in rows if row["t"] is not None]
    if not defined:
        status = "undefined"
    elif len(defined) < len(rows):
        status = "partial"
    else:
        status = "ok"
    pooled = inequality_report(aggregate(series), singles_rule, normalized)
    return {
        "status": status,
        "defined_blocks": len(defined),
        "block_mean": _stats_section(defined, level, 1.0, "above") if defined else None,
        "aggregate_t": pooled["t"],
    }


def analyze_series(
    series: ExperimentSeries,
    level: float = DEFAULT_LEVEL,
    drift: bool = False,
    singles_rule: str = "crossed",
    reference: str = "a1b1",
) -> dict[str, Any]:
    """Per-block J and T, their block statistics and Chebyshev intervals."""
    rows = []
    consistent = True
    for block in series.blocks:
        row = {"block_id": block.block_id}
        row.update(inequality_report(block, singles_rule))
        rows.append(row)
        consistent &= equivalence_check(block, singles_rule).consistent

    report: dict[str, Any] = {
        "l": series.l,
        "level": level,
        "singles_rule": singles_rule,
        "equivalence_consistent": consistent,
        "blocks": rows,
        "j": _stats_section([row["j"] for row in rows], level, 0.0, "below"),
        "t": _t_section(series, rows, level, singles_rule, False),
        "drift": None,
    }
    if drift:
        normed = drift_normalize(series, reference)
        drift_rows = []
        for block in normed.blocks:
            row = {"block_id": block.block_id}
            row.update(inequality_report(block, singles_rule, normalized=True))
            drift_rows.append(row)
        report["drift"] = {
            "reference": reference,
            "note": DRIFT_NOTE,
            "blocks": drift_rows,
            "t": _t_section(normed, drift_rows, level, singles_rule, True),
        }
    return report


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _level(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"level must lie in (0, 1), got {text}")
    return value


def cmd_analyze(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        series = read_series(args.input)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    report = analyze_series(series, args.level, args.drift, args.singles_rule, args.reference)
    text = dumps(report) if args.json else render_text("Bell test analysis", report)
    _write(text, args.output)
    if report["j"] is None or report["j"]["chebyshev"] is None:
        print("error: J statistics are degenerate (fewer than 2 blocks or zero spread)", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return secrets.randbits(32)


def build_source(args) -> SourceModel:
    eta_a = args.eta if args.eta_a is None else args.eta_a
    eta_b = args.eta if args.eta_b is None else args.eta_b
    if args.optimal:
        if eta_a != eta_b:
            raise UsageError("--optimal needs equal arm efficiencies")
        best = optimize_eberhard(eta_a, args.bg)
        return SourceModel(best.r, best.angles, eta_a, eta_b, args.bg)
    return SourceModel(args.r, tuple(math.radians(a) for a in args.angles), eta_a, eta_b, args.bg)


def _background_note(bg: float) -> None:
    if bg > 0:
        print(f"note: {BACKGROUND_NOTE}", file=sys.stderr)


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args.seed)
    src = build_source(args)
    series = simulate(src, SimConfig(args.pairs, args.blocks, seed))
    _write(serialize_series(series), args.output)
    print(f"seed: {seed}", file=sys.stderr)
    _background_note(args.bg)
    return EXIT_OK


def cmd_optimize(args) -> int:
    result = optimize_eberhard(args.eta, args.bg)
    report = result.to_dict()
    text = dumps(report) if args.json else render_text("Eberhard optimization", report)
    _write(text, args.output)
    _background_note(args.bg)
    return EXIT_OK


def cmd_noneq(args) -> int:
    if not args.lam > 1:
        raise UsageError(f"lambda must exceed 1, got {args.lam}")
    if not 0 < args.delta < 1:
        raise UsageError(f"delta must lie in (0, 1), got {args.delta}")
    if any(not k > 0 for k in args.k):
        raise UsageError("k must be positive")
    report = {"rows": [demo_row(args.delta, args.lam, k) for k in args.k]}
    if args.json:
        text = dumps(report)
    else:
        cols = ("delta", "lambda", "k", "a", "r_j", "r_t")
        lines = ["  ".join(f"{c:>24}" for c in cols)]
        for row in report["rows"]:
            lines.append("  ".join(f"{_cell(row[c]):>24}" for c in cols))
        text = "\n".join(lines) + "\n"
    _write(text, args.output)
    return EXIT_OK


def _cell(value: float) -> str:
    return format_number(float(value))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellstat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="block statistics and Chebyshev intervals for a counts CSV")
    p.add_argument("input", help="counts CSV path, or - for stdin")
    p.add_argument("--level", type=_level, default=DEFAULT_LEVEL, help="confidence level (default 0.9995)")
    p.add_argument("--drift", action="store_true", help="add the drift-normalized T' section")
    p.add_argument("--singles-rule", choices=SINGLES_RULES, default="crossed")
    p.add_argument("--reference", default="a1b1", help="reference run for drift normalization")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="write a simulated counts CSV")
    p.add_argument("--r", type=float, default=1.0, help="entanglement ratio r")
    p.add_argument("--angles", type=float, nargs=4, metavar=("A1", "A2", "B1", "B2"),
                   default=list(CANONICAL_ANGLES_DEG), help="analyzer angles in degrees")
    p.add_argument("--eta", type=float, default=1.0, help="detection efficiency of both arms")
    p.add_argument("--eta-a", type=float, default=None)
    p.add_argument("--eta-b", type=float, default=None)
    p.add_argument("--bg", type=float, default=0.0, help="background click probability per slot")
    p.add_argument("--optimal", action="store_true", help="use optimized r and angles for --eta/--bg")
    p.add_argument("--pairs", type=int, required=True, help="emitted pairs per run per block")
    p.add_argument("--blocks", type=int, default=30)
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (falls back to ${SEED_ENV})")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="minimize expected J over r and angles")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--bg", type=float, default=0.0)
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("noneq", help="two-point model: linear vs ratio significance")
    p.add_argument("delta", type=float)
    p.add_argument("lam", type=float, metavar="lambda")
    p.add_argument("k", type=float, nargs="+")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_noneq)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (BellStatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
