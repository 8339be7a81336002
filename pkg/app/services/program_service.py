import logging
from typing import Optional

from app.models.program import FreeDecl, SourceProgram
from app.models.report import CheckSummary, ReduceSummary, RoundtripSummary
from app.services.algebra_service import DEFAULT_ALGEBRAS, AlgebraSet
from app.services.checker_service import CheckedProgram, check_program
from app.services.metatheory_service import typed_trace
from app.services.parser_service import parse
from app.services.printer_service import print_program, show_ctx, show_derivation, show_process, show_trace_entry
from app.services.scope_service import from_raw, split_suffix, to_raw, well_scoped
from app.services.semantics_service import normalize_to_end

logger = logging.getLogger(__name__)


def check_source(source: str, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> CheckedProgram:
    return check_program(parse(source, algebras), algebras)


def summarize_check(checked: CheckedProgram) -> CheckSummary:
    return CheckSummary(
        names=checked.names,
        process=show_process(checked.process),
        derivation=show_derivation(checked.derivation),
        leftover=show_ctx(checked.derivation.ctx_out),
    )


def reduce_source(
    source: str,
    steps: Optional[int] = None,
    to_end: bool = False,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> ReduceSummary:
    """Run a program, retyping every reduct against the root contexts."""
    checked = check_source(source, algebras)
    entries = typed_trace(checked.derivation, steps, to_end, algebras=algebras)
    final = entries[-1].entry.process if entries else checked.process
    normal_form, _ = normalize_to_end(final)
    logger.info(f"Reduced program in {len(entries)} steps")
    return ReduceSummary(
        trace=tuple(show_trace_entry(typed.entry) for typed in entries),
        roots=tuple(f"{show_ctx(typed.ctx_in)} => {show_ctx(typed.ctx_out)}" for typed in entries),
        final=show_process(final),
        normal_form=show_process(normal_form),
    )


def suffixed(name: str) -> str:
    base, suffix = split_suffix(name)
    return f"{base}^{0 if suffix is None else suffix}"


def roundtrip_source(source: str, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> RoundtripSummary:
    """Convert to de Bruijn form and back, naming free names `name^0`."""
    program = parse(source, algebras, annotated=False)
    names = program.names
    process = from_raw(names, program.body, well_scoped(names, program.body))
    renamed = [suffixed(name) for name in names]
    decls = tuple(
        FreeDecl(name=new, type=decl.type, usage=decl.usage) for new, decl in zip(renamed, program.decls)
    )
    printed = print_program(SourceProgram(decls=decls, body=to_raw(renamed, process)))
    return RoundtripSummary(names=tuple(renamed), source=printed)
