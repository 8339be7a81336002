"""Command line front end: `python -m app.cli <command> ...`."""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional, TextIO

from pydantic import ValidationError

from app import config
from app.errors import LeftoverPiError, ParseError
from app.models.semantics import CongStep, ReductionStep
from app.schemas.response import StandardResponse
from app.schemas.utils import safe_serialize
from app.services.checker_service import derivation_subject
from app.services.metatheory_service import derive_capability, run_suite, subject_cong, subject_reduction
from app.services.printer_service import show_channel, show_ctx, show_process, show_step
from app.services.program_service import check_source, reduce_source, roundtrip_source, summarize_check
from app.services.semantics_service import applicable_rewrites, reductions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_PARSE_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leftover-pi", description="Resource-aware pi-calculus toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="typecheck a program and print its derivation")
    check.add_argument("file")
    check.add_argument("--json", action="store_true")

    reduce = commands.add_parser("reduce", help="run a program and print its trace")
    reduce.add_argument("file")
    bound = reduce.add_mutually_exclusive_group()
    bound.add_argument("--steps", type=int, default=None)
    bound.add_argument("--to-end", action="store_true")
    reduce.add_argument("--json", action="store_true")

    repl = commands.add_parser("repl", help="step through a program interactively")
    repl.add_argument("file")

    roundtrip = commands.add_parser("roundtrip", help="print to_raw(from_raw(program))")
    roundtrip.add_argument("file")
    roundtrip.add_argument("--json", action="store_true")

    properties = commands.add_parser("properties", help="run the metatheory property suites")
    properties.add_argument("--samples", type=int, default=config.PROPERTY_SAMPLES)
    properties.add_argument("--seed", type=int, default=config.PROPERTY_SEED)
    properties.add_argument("--budget", type=int, default=config.PROPERTY_BUDGET)
    properties.add_argument("--only", nargs="*", default=None)
    properties.add_argument("--json", action="store_true")

    serve = commands.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _emit_json(out: TextIO, message: str, data: Any, success: bool = True):
    response = StandardResponse(success=success, message=message, data=safe_serialize(data))
    out.write(response.model_dump_json(indent=2) + "\n")


def cmd_check(args, out: TextIO) -> int:
    checked = check_source(Path(args.file).read_text())
    summary = summarize_check(checked)
    if args.json:
        _emit_json(out, "Program checked", summary)
    else:
        out.write(summary.derivation + "\n")
        out.write(f"leftover: {summary.leftover}\n")
    return EXIT_OK


def cmd_reduce(args, out: TextIO) -> int:
    summary = reduce_source(Path(args.file).read_text(), args.steps, args.to_end)
    if args.json:
        _emit_json(out, f"Reduced in {len(summary.trace)} steps", summary)
        return EXIT_OK
    for line in summary.trace:
        out.write(line + "\n")
    if args.to_end:
        out.write(f"normal form: {summary.normal_form}\n")
    return EXIT_OK


def cmd_roundtrip(args, out: TextIO) -> int:
    summary = roundtrip_source(Path(args.file).read_text())
    if args.json:
        _emit_json(out, "Round trip printed", summary)
    else:
        out.write(summary.source)
    return EXIT_OK


def cmd_properties(args, out: TextIO) -> int:
    run = run_suite(args.only, samples=args.samples, seed=args.seed, budget=args.budget)
    if args.json:
        _emit_json(out, "Properties hold" if run.ok else "Property failed", run, run.ok)
        return EXIT_OK if run.ok else EXIT_TYPE_ERROR
    for report in run.reports:
        if report.ok:
            out.write(f"{report.name}: passed {report.passed}/{report.samples} (seed {report.seed}, budget {report.budget})\n")
        else:
            failure = report.failure
            out.write(f"{report.name}: FAILED after {report.passed} samples at seed {failure.seed}, budget {failure.budget}\n")
            out.write(f"  reason: {failure.reason}\n  process: {failure.process}\n")
    return EXIT_OK if run.ok else EXIT_TYPE_ERROR


def cmd_serve(args, out: TextIO) -> int:
    import uvicorn
    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return EXIT_OK


def cmd_repl(args, out: TextIO, stdin: TextIO) -> int:
    """Offer numbered reductions and rewrites until none is left or the user quits."""
    derivation = check_source(Path(args.file).read_text()).derivation
    while True:
        process = derivation_subject(derivation)
        out.write(f"process: {show_process(process)}\n")
        out.write(f"contexts: {show_ctx(derivation.ctx_in)} => {show_ctx(derivation.ctx_out)}\n")
        options: List[Any] = list(reductions(process)) + list(applicable_rewrites(process))
        if not options:
            out.write("no step applies\n")
            return EXIT_OK
        for number, option in enumerate(options, start=1):
            if isinstance(option, ReductionStep):
                out.write(f"  [{number}] comm on {show_channel(option.channel)} -> {show_process(option.process)}\n")
            else:
                out.write(f"  [{number}] {show_step(option)}\n")
        out.write("> ")
        out.flush()
        line = stdin.readline()
        if not line or line.strip() in ("q", "quit"):
            return EXIT_OK
        choice = line.strip()
        if not choice.isdigit() or not 1 <= int(choice) <= len(options):
            out.write(f"choose a number between 1 and {len(options)}, or q\n")
            continue
        option = options[int(choice) - 1]
        if isinstance(option, CongStep):
            derivation = subject_cong(derivation, option.rule, option.path, option.direction)
        else:
            capability = None
            if option.channel.kind == "external":
                capability = derive_capability(derivation, option.channel.index)
            derivation = subject_reduction(derivation, option, capability)
        out.write(f"leftover: {show_ctx(derivation.ctx_out)}\n")


def main(argv: Optional[List[str]] = None, stdin: TextIO = sys.stdin, stdout: TextIO = sys.stdout) -> int:
    logging.basicConfig(level=config.LOG_LEVEL)
    args = build_parser().parse_args(argv)
    handlers = {
        "check": cmd_check,
        "reduce": cmd_reduce,
        "roundtrip": cmd_roundtrip,
        "properties": cmd_properties,
        "serve": cmd_serve,
    }
    try:
        if args.command == "repl":
            return cmd_repl(args, stdout, stdin)
        return handlers[args.command](args, stdout)
    except ParseError as exc:
        stdout.write(f"parse error: {exc}\n")
        return EXIT_PARSE_ERROR
    except LeftoverPiError as exc:
        stdout.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_TYPE_ERROR
    except ValidationError as exc:
        stdout.write(f"invalid program: {exc}\n")
        return EXIT_TYPE_ERROR
    except OSError as exc:
        stdout.write(f"cannot read input: {exc}\n")
        return EXIT_TYPE_ERROR


if __name__ == "__main__":
    sys.exit(main())
