"""
OpenSets - greedy open-set decomposition toolkit.
Command-line front end: decompose, audit, compare, smooth and validate-seq runs
with reproducible JSON/CSV/markdown artifacts.
"""

import argparse
import logging
import sys
import time
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from approximation.baseline import compare
from approximation.decomposition import decompose, error_report, verify_invariants
from approximation.semicontinuity import dini_harness, sampled_defect
from approximation.smooth_minorant import minorize
from calculus.coefficients import CoefficientSequence, parse_sequence_spec, validate
from calculus.scalar import audit
from dsl.parser import parse
from models.config import (
    DEFAULT_COEFFS,
    DEFAULT_CROSS_VALIDATION_SAMPLES,
    DEFAULT_DOMAIN,
    DEFAULT_DYADIC_LEVELS,
    DEFAULT_HORIZON,
    DEFAULT_LEVELS,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    RunConfig,
    Subcommand
)
from models.domain import parse_domain
from models.reports import DecompositionSummary, SemicontinuityMode
from models.sequence import ValidationVerdict
from utils.errors import (
    CrossValidationMismatch,
    DomainError,
    DominationViolation,
    MonotonicityViolation,
    NegativeValue,
    OpenSetsError
)
from utils.export import (
    comparison_frame,
    error_curve_frame,
    export_masks_pgm,
    export_to_csv,
    export_to_json,
    export_to_markdown,
    write_text
)
from utils.logging_config import StructuredLogger, get_logger, setup_logging
from utils.rationals import format_rational, parse_rational

__version__ = "0.1.0"
TOOL_NAME = "opensets"

# Exit codes
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATION = 3
EXIT_NEGATIVE = 4


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per subcommand; global flags go after the subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-json", help="JSON report path (default: stdout)")
    common.add_argument("--out-csv", help="CSV table path")
    common.add_argument("--out-md", help="Markdown report path")
    common.add_argument("--masks", help="Levels whose masks are written as PGM, e.g. 1..4,10")
    common.add_argument("--out-dir", help="Directory for PGM masks (default: current directory)")
    common.add_argument("--workers", type=int, default=DEFAULT_WORKERS, help="Worker processes")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random seed")
    common.add_argument("--record-time", action="store_true", help="Write the wall time into the meta block")
    common.add_argument("--verbose", action="store_true", help="Debug logging")
    common.add_argument("--log-file", help="Also log to this file")

    function_args = argparse.ArgumentParser(add_help=False)
    function_args.add_argument("--fn", required=True, help="Function expression in x1..xd")
    function_args.add_argument("--domain", default=DEFAULT_DOMAIN, help="grid1d:lo:hi[:n], grid2d:lo:hi[:NxM] or finite:path.json")
    function_args.add_argument("--coeffs", default=DEFAULT_COEFFS, help="Coefficient sequence descriptor")
    function_args.add_argument("--levels", type=int, default=DEFAULT_LEVELS, help="Number of levels N")

    parser = argparse.ArgumentParser(prog=TOOL_NAME, description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(Subcommand.DECOMPOSE.value, parents=[common, function_args], help="Greedy decomposition of f")
    p.add_argument("--eps", help="Extra tolerances for the N(eps) table, comma separated")
    p.add_argument("--radius", help="Smallest radius of the sampled defect check (default: mesh)")

    p = sub.add_parser(Subcommand.AUDIT.value, parents=[common], help="Exact openness audit of U_1..U_N")
    p.add_argument("--coeffs", default=DEFAULT_COEFFS, help="Coefficient sequence descriptor")
    p.add_argument("--levels", type=int, default=DEFAULT_LEVELS, help="Number of levels N")
    p.add_argument("--vmax", required=True, help="Upper end of the analysed value range (rational)")
    p.add_argument("--samples", type=int, default=DEFAULT_CROSS_VALIDATION_SAMPLES, help="Cross-validation values")

    p = sub.add_parser(Subcommand.COMPARE.value, parents=[common, function_args], help="Greedy vs dyadic sup errors")
    p.add_argument("--dyadic-levels", default=DEFAULT_DYADIC_LEVELS, help="Dyadic levels, e.g. 1..12")

    sub.add_parser(Subcommand.SMOOTH.value, parents=[common, function_args], help="Smooth bump minorants")

    p = sub.add_parser(Subcommand.VALIDATE_SEQ.value, parents=[common], help="Validate a coefficient sequence")
    p.add_argument("--coeffs", default=DEFAULT_COEFFS, help="Coefficient sequence descriptor")
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON, help="Number of terms inspected")

    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Validated RunConfig from parsed arguments (unset flags keep the model defaults)."""
    values = {
        key: value for key, value in vars(args).items()
        if key in RunConfig.model_fields and value is not None
    }
    return RunConfig(**values)


def build_meta(config: RunConfig, started: float) -> Dict[str, Any]:
    """Meta block: tool version and config echo, wall time only on request."""
    meta: Dict[str, Any] = {
        "tool": TOOL_NAME,
        "version": __version__,
        "config": config.config_echo(),
    }
    if config.record_time:
        meta["wall_time_s"] = round(time.perf_counter() - started, 6)
    return meta


def emit(config: RunConfig, payload: Dict[str, Any], title: str, frame: Optional[pd.DataFrame] = None):
    """Write the JSON report (stdout unless --out-json), the CSV table and the markdown report."""
    write_text(export_to_json(payload), config.out_json)
    if config.out_csv and frame is not None:
        export_to_csv(frame, config.out_csv)
    if config.out_md:
        write_text(export_to_markdown(payload, title), config.out_md)


def hypothesis_notes(seq: CoefficientSequence, config: RunConfig, log: StructuredLogger) -> List[str]:
    """Validate the sequence; FAIL reasons are logged and returned as report notes."""
    report = validate(seq, config.horizon)
    if report.verdict != ValidationVerdict.FAIL:
        return []
    log.warning("Sequence violates the decomposition hypotheses", reasons=report.notes)
    return [f"sequence hypotheses fail: {reason}" for reason in report.notes]


def run_decompose(config: RunConfig, log: StructuredLogger, started: float) -> int:
    """decompose -> error_report -> verify_invariants -> dini_harness."""
    domain = parse_domain(config.domain)
    fn = parse(config.fn, domain.dim)
    seq = parse_sequence_spec(config.coeffs)
    notes = hypothesis_notes(seq, config, log)

    dec = decompose(domain, fn, seq, config.levels, config.workers)
    errors = error_report(dec, config.eps)
    violations = verify_invariants(dec)
    log.info("Decomposition checked", samples=dec.size, levels=dec.levels, violations=len(violations))

    dini = None
    exit_code = EXIT_OK
    if dec.levels >= 2:
        try:
            dini = dini_harness(dec, config.eps)
        except MonotonicityViolation as e:
            notes.append(f"monotonicity violation: {e}")
            exit_code = EXIT_VIOLATION
    else:
        notes.append("the Dini harness needs at least 2 levels")

    if domain.is_grid:
        radius = parse_rational(config.radius) if config.radius else None
        field = sampled_defect(dec.partial_sum_values(dec.levels), domain, SemicontinuityMode.LSC, radius)
        counts = ", ".join(
            f"{int(flags.sum())} at r = {format_rational(r)}" for r, flags in zip(field.radii, field.flagged)
        )
        notes.append(f"sampled l.s.c. defect of S_N flags {counts} (heuristic, never a proof)")

    if violations:
        exit_code = EXIT_VIOLATION
        kinds = sorted({v.kind for v in violations})
        log.error("Invariant violations", count=len(violations), kinds=kinds)

    summary = DecompositionSummary(
        domain=domain.descriptor(),
        sequence=seq.descriptor(),
        levels=dec.levels,
        samples=dec.size,
        vmax=format_rational(dec.vmax),
        max_value=dec.max_value,
        n_eps=errors.n_eps,
        boundary_fragile_samples=errors.boundary_fragile_samples,
        violations=len(violations),
        caveat=errors.caveat,
        dini=dini,
        notes=notes,
    )

    if config.masks:
        if domain.is_grid:
            skipped = [n for n in config.masks if n > dec.levels]
            if skipped:
                log.warning("Mask levels above N skipped", levels=skipped, N=dec.levels)
            chosen = {n: dec.mask_grid(n) for n in config.masks if n <= dec.levels}
            written = export_masks_pgm(chosen, config.out_dir or ".")
            log.info("Masks written", count=len(written))
        else:
            log.warning("Masks are only written for grid domains")

    payload = {
        "meta": build_meta(config, started),
        "summary": summary,
        "errors": errors,
        "violations": violations,
    }
    emit(config, payload, "Decomposition report", error_curve_frame(errors.levels))
    return exit_code


def run_audit(config: RunConfig, log: StructuredLogger, started: float) -> int:
    """Openness audit; the findings are the output, so only a mismatch fails the run."""
    seq = parse_sequence_spec(config.coeffs)
    report = audit(seq, config.levels, parse_rational(config.vmax), config.samples, config.seed)
    report.notes.extend(hypothesis_notes(seq, config, log))
    log.info("Audit finished", first_non_open=report.first_non_open_level, all_open=report.all_open)

    payload = {"meta": build_meta(config, started), "audit": report}
    frame = pd.DataFrame(
        [{"level": e.index, "open": e.open, "intervals": " ".join(e.intervals)} for e in report.levels],
        columns=["level", "open", "intervals"],
    )
    emit(config, payload, "Openness audit", frame)
    return EXIT_OK


def run_compare(config: RunConfig, log: StructuredLogger, started: float) -> int:
    """Greedy and dyadic sup-error curves side by side."""
    domain = parse_domain(config.domain)
    fn = parse(config.fn, domain.dim)
    seq = parse_sequence_spec(config.coeffs)

    dec = decompose(domain, fn, seq, config.levels, config.workers)
    report = compare(dec, config.dyadic_levels)
    report.notes.extend(hypothesis_notes(seq, config, log))
    log.info("Comparison finished", rows=len(report.rows))

    payload = {"meta": build_meta(config, started), "comparison": report}
    emit(config, payload, "Greedy vs dyadic", comparison_frame(report.rows))
    return EXIT_OK


def run_smooth(config: RunConfig, log: StructuredLogger, started: float) -> int:
    """Bump minorants with the exact domination check."""
    domain = parse_domain(config.domain)
    fn = parse(config.fn, domain.dim)
    seq = parse_sequence_spec(config.coeffs)

    bumps, residual = minorize(fn, domain, seq, config.levels, config.workers)
    residual.notes.extend(hypothesis_notes(seq, config, log))
    log.info("Minorants built", bumps=len(bumps), skipped=len(residual.skipped_levels))

    payload = {"meta": build_meta(config, started), "bumps": bumps, "residual": residual}
    frame = pd.DataFrame(
        [b.model_dump(mode="json") for b in bumps],
        columns=["level", "center", "radius", "height"],
    )
    emit(config, payload, "Smooth minorants", frame)
    return EXIT_OK


def run_validate_seq(config: RunConfig, log: StructuredLogger, started: float) -> int:
    """Print the ValidationReport of a sequence."""
    seq = parse_sequence_spec(config.coeffs)
    report = validate(seq, config.horizon)
    log.info("Sequence validated", verdict=report.verdict.value)

    payload = {"meta": build_meta(config, started), "validation": report}
    emit(config, payload, "Sequence validation")
    return EXIT_OK


COMMANDS: Dict[Subcommand, Callable[[RunConfig, StructuredLogger, float], int]] = {
    Subcommand.DECOMPOSE: run_decompose,
    Subcommand.AUDIT: run_audit,
    Subcommand.COMPARE: run_compare,
    Subcommand.SMOOTH: run_smooth,
    Subcommand.VALIDATE_SEQ: run_validate_seq,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    started = time.perf_counter()
    args = build_parser().parse_args(argv)

    try:
        config = build_config(args)
    except (ValidationError, ValueError) as e:
        setup_logging()
        get_logger("cli").error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    setup_logging(
        level=logging.DEBUG if config.verbose else logging.INFO,
        log_file=config.log_file,
        trace_id=config.trace_id(),
    )
    log = StructuredLogger(get_logger("cli"), config.trace_id())
    log.info("Run started", command=config.command.value, version=__version__)

    try:
        exit_code = COMMANDS[config.command](config, log, started)
    except (NegativeValue, DomainError) as e:
        log.error("Function is not a nonnegative real on the domain", error=str(e))
        return EXIT_NEGATIVE
    except (CrossValidationMismatch, MonotonicityViolation, DominationViolation) as e:
        log.error("Invariant violation", error=str(e))
        return EXIT_VIOLATION
    except (OpenSetsError, ValidationError, ValueError) as e:
        log.error("Configuration or parse error", error=str(e))
        return EXIT_CONFIG

    log.info("Run finished", exit_code=exit_code, wall_time_s=round(time.perf_counter() - started, 3))
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
