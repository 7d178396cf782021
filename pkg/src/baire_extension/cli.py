"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import documents
from .engine import ARITHMETICS, MODES, extend, extend_positive, POSITIVE
from .separation import ContractViolation
from .space import ValidationError
from .verification import check_equations

log = logging.getLogger("baire_extension")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2


def _write(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def run_instance(instance: documents.ProblemInstance):
    run = extend_positive if instance.mode == POSITIVE else extend
    return run(instance.space, instance.A, instance.f, instance.tolerance,
               alpha=instance.alpha, arithmetic=instance.arithmetic)


def _report_failures(report) -> None:
    for ch in report.failed():
        log.error("check %s failed (slack %s, witness %s)", ch.name, ch.slack, ch.witness)


def cmd_extend(args) -> int:
    overrides = {"tolerance": args.tolerance, "mode": args.mode, "alpha": args.alpha, "arithmetic": args.arithmetic}
    instance = documents.load_instance(args.instance, overrides)
    result = run_instance(instance)
    _write(documents.dumps(documents.result_to_doc(result, instance)), args.output)
    if args.plot:
        _write(documents.plot_table(result, instance, args.delimiter), args.plot)

    report = check_equations(instance.space, instance.A, instance.f, result, instance.tolerance)
    if not report.overall:
        _report_failures(report)
        return EXIT_VERIFY
    log.info("K=%d error_bound=%s", result.K, result.error_bound)
    return EXIT_OK


def cmd_verify(args) -> int:
    given = documents.load_instance(args.instance)
    result, instance = documents.result_from_doc(documents.load_document(args.result), given)
    report = check_equations(instance.space, instance.A, instance.f, result, instance.tolerance)
    _write(documents.dumps(documents.report_to_doc(report, result.arithmetic)), args.output)
    if not report.overall:
        _report_failures(report)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_plot(args) -> int:
    result, instance = documents.result_from_doc(documents.load_document(args.result))
    _write(documents.plot_table(result, instance, args.delimiter), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baire-extend",
        description="Extend a bounded function from a subset of a finite metric space by a geometric series.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extend", help="run the extension on an instance file")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("-o", "--output", help="result JSON path (default: stdout)")
    p.add_argument("--tolerance", help="truncation tolerance, e.g. 1e-6 or 1/1000 (overrides the file)")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--alpha", type=int, help="Baire class label carried on the separating sets")
    p.add_argument("--arithmetic", choices=ARITHMETICS)
    p.add_argument("--plot", help="also write plot data to this path")
    p.add_argument("--delimiter", default=",", help="plot table delimiter")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("verify", help="check a result file against its instance")
    p.add_argument("result")
    p.add_argument("instance")
    p.add_argument("-o", "--output", help="report JSON path (default: stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="write plot data for a result file")
    p.add_argument("result")
    p.add_argument("-o", "--output", help="table path (default: stdout)")
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
