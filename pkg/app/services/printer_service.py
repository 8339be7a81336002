from typing import List

from app.models.derivation import Derivation
from app.models.process import End, Par, Process, Raw, RawEnd, RawPar, RawRecv, RawRes, RawSend, Recv, Res, Send
from app.models.program import SourceProgram
from app.models.semantics import Channel, CongStep, TraceEntry
from app.models.types import ChanType, Ctx, NuAnnot, Type, UsagePair


def show_pair(pair: UsagePair) -> str:
    return f"({pair.input},{pair.output})"


def show_usage_pair(pair: UsagePair) -> str:
    return f"{pair.alg} {show_pair(pair)}"


def show_type(t: Type) -> str:
    if isinstance(t, ChanType):
        return f"chan<{show_type(t.payload)}>[{show_usage_pair(t.usage)}]"
    return "unit"


def show_annot(annot: NuAnnot) -> str:
    return f"{show_type(annot.channel_type)} @ {annot.chan_alg} {annot.chan_mult}"


def show_ctx(ctx: Ctx) -> str:
    """Usage context, oldest entry first."""
    return "[" + ", ".join(show_usage_pair(pair) for pair in reversed(ctx)) + "]"


def show_channel(channel: Channel) -> str:
    if channel.kind == "internal":
        return "internal"
    return f"ext {channel.index}"


def _body(text: str, node) -> str:
    return f"({text})" if node.kind == "par" else text


def show_process(p: Process) -> str:
    """Canonical de Bruijn text."""
    if isinstance(p, End):
        return "end"
    if isinstance(p, Res):
        annot = f"{{{show_annot(p.annot)}}}" if p.annot is not None else ""
        return f"new[{p.hint}]{annot}. {_body(show_process(p.body), p.body)}"
    if isinstance(p, Par):
        return f"{_body(show_process(p.left), p.left)} | {show_process(p.right)}"
    if isinstance(p, Recv):
        return f"{p.chan.index}?({p.hint}). {_body(show_process(p.body), p.body)}"
    return f"{p.chan.index}!{p.payload.index}. {_body(show_process(p.body), p.body)}"


def show_raw(p: Raw) -> str:
    """Surface text accepted by the parser."""
    if isinstance(p, RawEnd):
        return "end"
    if isinstance(p, RawRes):
        annot = f" : {show_annot(p.annot)}" if p.annot is not None else ""
        return f"new {p.binder}{annot} . {_body(show_raw(p.body), p.body)}"
    if isinstance(p, RawPar):
        return f"{_body(show_raw(p.left), p.left)} | {show_raw(p.right)}"
    if isinstance(p, RawRecv):
        return f"{p.chan}?({p.binder}). {_body(show_raw(p.body), p.body)}"
    if isinstance(p, RawSend):
        return f"{p.chan}!{p.payload}. {_body(show_raw(p.body), p.body)}"
    raise TypeError(f"not a raw process: {p!r}")


def print_program(program: SourceProgram) -> str:
    lines = [
        f"free {decl.name} : {show_type(decl.type)} @ {show_usage_pair(decl.usage)};"
        for decl in program.decls
    ]
    lines.append(show_raw(program.body))
    return "\n".join(lines) + "\n"


def show_step(step: CongStep) -> str:
    path = "/".join(selector.value for selector in step.path) or "root"
    return f"{step.rule.value} {step.direction.value} at {path}"


def show_trace_entry(entry: TraceEntry) -> str:
    return f"step {entry.step}: channel={show_channel(entry.channel)} ; process={show_process(entry.process)}"


def show_head(d: Derivation) -> str:
    if d.kind == "end":
        return "end"
    if d.kind == "par":
        return "|"
    if d.kind == "res":
        annot = f"{{{show_annot(d.annot)}}}" if d.annot is not None else ""
        return f"new[{d.hint}]{annot}"
    if d.kind == "recv":
        return f"{d.chan_ref.index}?({d.hint})"
    return f"{d.chan_ref.index}!{d.payload_ref.index}"


def show_derivation(d: Derivation) -> str:
    """One node per line, children indented below their parent."""
    lines: List[str] = []

    def visit(node: Derivation, indent: int):
        lines.append(
            f"{'  ' * indent}{node.kind} {show_head(node)} :: {show_ctx(node.ctx_in)} => {show_ctx(node.ctx_out)}"
        )
        for child in node.children:
            visit(child, indent + 1)

    visit(d, 0)
    return "\n".join(lines)
