import logging
from typing import Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from app.errors import (
    AlgebraError, IndexOutOfRange, LeftoverPiError, MissingAnnotation, NotAChannel,
    PayloadTypeMismatch, ResidualUsage, ScopeDepthError,
)
from app.models.derivation import Derivation, RecheckFailure, VarRefStep
from app.models.process import End, Name, Par, Process, Recv, Res, Send
from app.models.program import SourceProgram
from app.models.semantics import Selector
from app.models.types import ChanType, Ctx, Idxs, NuAnnot, PreCtx, Scope, Type, UsagePair
from app.services.algebra_service import (
    DEFAULT_ALGEBRAS, AlgebraSet, consumption, in_pair, out_pair, pair_in, zero_pair,
)
from app.services.context_service import consume_var
from app.services.scope_service import from_raw, var, well_scoped

logger = logging.getLogger(__name__)

CHILD_SELECTORS = {
    "res": (Selector.RES_BODY,),
    "recv": (Selector.RECV_BODY,),
    "send": (Selector.SEND_BODY,),
    "par": (Selector.PAR_LEFT, Selector.PAR_RIGHT),
    "end": (),
}


class CheckedProgram(BaseModel):
    model_config = ConfigDict(frozen=True)

    names: Tuple[str, ...]
    scope: Scope
    process: Process
    derivation: Derivation


def type_equal(a: Type, b: Type) -> bool:
    return a == b


def validate_type(t: Type, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> None:
    if isinstance(t, ChanType):
        if not pair_in(algebras.resolve(t.usage.alg), t.usage):
            raise AlgebraError(f"Usage {t.usage.input},{t.usage.output} is not in algebra '{t.usage.alg}'")
        validate_type(t.payload, algebras)


def validate_annot(annot: NuAnnot, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> None:
    validate_type(annot.channel_type, algebras)
    if not algebras.resolve(annot.chan_alg).contains(annot.chan_mult):
        raise AlgebraError(f"Multiplicity {annot.chan_mult} is not in algebra '{annot.chan_alg}'")


# Node builders; contexts are derived from the children

def make_end(pre: PreCtx, idxs: Idxs, ctx: Ctx) -> Derivation:
    return Derivation(kind="end", pre=pre, idxs=idxs, ctx_in=ctx, ctx_out=ctx)


def make_par(left: Derivation, right: Derivation) -> Derivation:
    return Derivation(
        kind="par", pre=left.pre, idxs=left.idxs,
        ctx_in=left.ctx_in, ctx_out=right.ctx_out, children=(left, right),
    )


def make_res(hint: Name, annot: NuAnnot, child: Derivation) -> Derivation:
    return Derivation(
        kind="res", pre=child.pre[1:], idxs=child.idxs[1:],
        ctx_in=child.ctx_in[1:], ctx_out=child.ctx_out[1:],
        hint=hint, annot=annot, children=(child,),
    )


def make_recv(ctx_in: Ctx, hint: Name, chan_ref: VarRefStep, child: Derivation) -> Derivation:
    return Derivation(
        kind="recv", pre=child.pre[1:], idxs=child.idxs[1:],
        ctx_in=ctx_in, ctx_out=child.ctx_out[1:],
        hint=hint, chan_ref=chan_ref, children=(child,),
    )


def make_send(ctx_in: Ctx, chan_ref: VarRefStep, payload_ref: VarRefStep, child: Derivation) -> Derivation:
    return Derivation(
        kind="send", pre=child.pre, idxs=child.idxs,
        ctx_in=ctx_in, ctx_out=child.ctx_out,
        chan_ref=chan_ref, payload_ref=payload_ref, children=(child,),
    )


def check(
    pre: PreCtx,
    idxs: Idxs,
    ctx: Ctx,
    p: Process,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> Tuple[Derivation, Ctx]:
    """Type `p` under the given contexts, returning its derivation and leftover usage."""
    if not (len(pre) == len(idxs) == len(ctx) == p.depth):
        raise ScopeDepthError(
            f"Contexts of lengths {len(pre)}/{len(idxs)}/{len(ctx)} cannot type a process of depth {p.depth}"
        )
    for k, (idx, pair) in enumerate(zip(idxs, ctx)):
        if not pair_in(algebras.resolve(idx), pair):
            raise AlgebraError(f"Usage at position {k} does not belong to algebra '{idx}'")
    derivation = _check(tuple(pre), tuple(idxs), tuple(ctx), p, algebras, ())
    return derivation, derivation.ctx_out


def _check(
    pre: PreCtx, idxs: Idxs, ctx: Ctx, p: Process, algebras: AlgebraSet, path: Tuple[str, ...]
) -> Derivation:
    try:
        return _check_node(pre, idxs, ctx, p, algebras, path)
    except LeftoverPiError as exc:
        raise exc.with_path(path)


def _exhausted(child: Derivation, hint: str, algebras: AlgebraSet) -> None:
    head = child.ctx_out[0]
    if head != zero_pair(algebras.resolve(child.idxs[0])):
        raise ResidualUsage(hint, head)


def _check_node(
    pre: PreCtx, idxs: Idxs, ctx: Ctx, p: Process, algebras: AlgebraSet, path: Tuple[str, ...]
) -> Derivation:
    if isinstance(p, End):
        logger.debug(f"end at {path}")
        return make_end(pre, idxs, ctx)

    if isinstance(p, Res):
        if p.annot is None:
            raise MissingAnnotation(p.hint)
        validate_annot(p.annot, algebras)
        child = _check(
            (p.annot.channel_type,) + pre,
            (p.annot.chan_alg,) + idxs,
            (p.annot.slot_usage,) + ctx,
            p.body, algebras, path + (Selector.RES_BODY.value,),
        )
        _exhausted(child, p.hint, algebras)
        logger.debug(f"res '{p.hint}' at {path}")
        return make_res(p.hint, p.annot, child)

    if isinstance(p, Par):
        left = _check(pre, idxs, ctx, p.left, algebras, path + (Selector.PAR_LEFT.value,))
        right = _check(pre, idxs, left.ctx_out, p.right, algebras, path + (Selector.PAR_RIGHT.value,))
        logger.debug(f"par at {path}")
        return make_par(left, right)

    i = p.chan.index
    if not isinstance(pre[i], ChanType):
        raise NotAChannel(i, pre[i])

    if isinstance(p, Recv):
        demanded = in_pair(algebras.resolve(idxs[i]))
        t, leftover = consume_var(pre, idxs, ctx, i, demanded, algebras)
        chan_ref = VarRefStep(index=i, type=t, demanded=demanded, leftover=leftover)
        child = _check(
            (t.payload,) + pre, (t.idx,) + idxs, (t.usage,) + leftover,
            p.body, algebras, path + (Selector.RECV_BODY.value,),
        )
        _exhausted(child, p.hint, algebras)
        logger.debug(f"recv on {i} at {path}")
        return make_recv(ctx, p.hint, chan_ref, child)

    demanded = out_pair(algebras.resolve(idxs[i]))
    t, after_chan = consume_var(pre, idxs, ctx, i, demanded, algebras)
    chan_ref = VarRefStep(index=i, type=t, demanded=demanded, leftover=after_chan)
    j = p.payload.index
    if not type_equal(pre[j], t.payload):
        raise PayloadTypeMismatch(j, t.payload, pre[j])
    _, after_payload = consume_var(pre, idxs, after_chan, j, t.usage, algebras)
    payload_ref = VarRefStep(index=j, type=pre[j], demanded=t.usage, leftover=after_payload)
    child = _check(pre, idxs, after_payload, p.body, algebras, path + (Selector.SEND_BODY.value,))
    logger.debug(f"send {i}!{j} at {path}")
    return make_send(ctx, chan_ref, payload_ref, child)


# Reading derivations back

def derivation_subject(d: Derivation) -> Process:
    """The process a derivation types."""
    depth = len(d.pre)
    if d.kind == "end":
        return End(depth=depth)
    if d.kind == "res":
        return Res(depth=depth, hint=d.hint or "_", annot=d.annot, body=derivation_subject(d.children[0]))
    if d.kind == "par":
        return Par(depth=depth, left=derivation_subject(d.children[0]), right=derivation_subject(d.children[1]))
    if d.kind == "recv":
        return Recv(
            depth=depth, chan=var(d.chan_ref.index, depth), hint=d.hint or "_",
            body=derivation_subject(d.children[0]),
        )
    return Send(
        depth=depth, chan=var(d.chan_ref.index, depth), payload=var(d.payload_ref.index, depth),
        body=derivation_subject(d.children[0]),
    )


def subderivation(d: Derivation, path: Sequence[Selector]) -> Derivation:
    node = d
    for selector in path:
        selectors = CHILD_SELECTORS[node.kind]
        if selector not in selectors:
            raise IndexOutOfRange(len(selectors), len(selectors))
        node = node.children[selectors.index(selector)]
    return node


def consumption_of(d: Derivation, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Optional[Ctx]:
    return consumption(d.ctx_in, d.ctx_out, algebras)


# Rechecking oracle

def _var_ref_failure(
    d: Derivation, ref: VarRefStep, ctx_in: Ctx, demanded: UsagePair, algebras: AlgebraSet
) -> Optional[str]:
    if ref.demanded != demanded:
        return f"reference {ref.index} demands {ref.demanded}, rule needs {demanded}"
    try:
        t, leftover = consume_var(d.pre, d.idxs, ctx_in, ref.index, demanded, algebras)
    except LeftoverPiError as exc:
        return exc.message
    if t != ref.type:
        return f"reference {ref.index} records type {ref.type}, context holds {t}"
    if leftover != ref.leftover:
        return f"reference {ref.index} records a wrong leftover"
    return None


def _node_failure(d: Derivation, algebras: AlgebraSet) -> Optional[str]:
    if not (len(d.pre) == len(d.idxs) == len(d.ctx_in) == len(d.ctx_out)):
        return "contexts are misaligned"
    for k, (idx, a, b) in enumerate(zip(d.idxs, d.ctx_in, d.ctx_out)):
        alg = algebras.resolve(idx)
        if not (pair_in(alg, a) and pair_in(alg, b)):
            return f"usage at position {k} is outside algebra '{idx}'"

    if d.kind == "end":
        return None if d.ctx_in == d.ctx_out else "end must leave its context untouched"

    if d.kind == "par":
        left, right = d.children
        for child in (left, right):
            if child.pre != d.pre or child.idxs != d.idxs:
                return "parallel components must share the typing context"
        if left.ctx_in != d.ctx_in:
            return "left component must start from the node input"
        if left.ctx_out != right.ctx_in:
            return "right component must start from the left leftover"
        if right.ctx_out != d.ctx_out:
            return "node output must be the right leftover"
        return None

    child = d.children[0]
    if d.kind == "res":
        if d.annot is None:
            return "restriction without annotation"
        try:
            validate_annot(d.annot, algebras)
        except LeftoverPiError as exc:
            return exc.message
        expected_in = (d.annot.slot_usage,) + d.ctx_in
        if child.pre != (d.annot.channel_type,) + d.pre or child.idxs != (d.annot.chan_alg,) + d.idxs:
            return "restriction body must bind the annotated channel"
        if child.ctx_in != expected_in:
            return "restriction body must start with the annotated multiplicity"
        if child.ctx_out != (zero_pair(algebras.resolve(d.annot.chan_alg)),) + d.ctx_out:
            return "restriction body must exhaust its channel and return the node output"
        return None

    ref = d.chan_ref
    if ref is None or not 0 <= ref.index < len(d.pre) or not isinstance(d.pre[ref.index], ChanType):
        return "prefix must reference a channel"
    t = d.pre[ref.index]
    if d.kind == "recv":
        failure = _var_ref_failure(d, ref, d.ctx_in, in_pair(algebras.resolve(d.idxs[ref.index])), algebras)
        if failure:
            return failure
        if child.pre != (t.payload,) + d.pre or child.idxs != (t.idx,) + d.idxs:
            return "input body must bind the payload"
        if child.ctx_in != (t.usage,) + ref.leftover:
            return "input body must start from the channel leftover"
        if child.ctx_out != (zero_pair(algebras.resolve(t.idx)),) + d.ctx_out:
            return "input body must exhaust its payload and return the node output"
        return None

    failure = _var_ref_failure(d, ref, d.ctx_in, out_pair(algebras.resolve(d.idxs[ref.index])), algebras)
    if failure:
        return failure
    payload = d.payload_ref
    if payload is None or not 0 <= payload.index < len(d.pre):
        return "output must reference a payload"
    if not type_equal(d.pre[payload.index], t.payload):
        return "payload type differs from the channel payload"
    failure = _var_ref_failure(d, payload, ref.leftover, t.usage, algebras)
    if failure:
        return failure
    if child.pre != d.pre or child.idxs != d.idxs:
        return "output continuation must share the typing context"
    if child.ctx_in != payload.leftover:
        return "output continuation must start from the payload leftover"
    if child.ctx_out != d.ctx_out:
        return "node output must be the continuation leftover"
    return None


def recheck_report(d: Derivation, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Optional[RecheckFailure]:
    """First node, in pre-order, whose stored contexts do not fit its rule."""

    def visit(node: Derivation, path: Tuple[str, ...]) -> Optional[RecheckFailure]:
        try:
            reason = _node_failure(node, algebras)
        except LeftoverPiError as exc:
            reason = exc.message
        if reason is not None:
            return RecheckFailure(path=path, reason=reason)
        for selector, child in zip(CHILD_SELECTORS[node.kind], node.children):
            failure = visit(child, path + (selector.value,))
            if failure is not None:
                return failure
        return None

    return visit(d, ())


def recheck(d: Derivation, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> bool:
    failure = recheck_report(d, algebras)
    if failure is not None:
        logger.debug(f"recheck failed at {'/'.join(failure.path) or 'root'}: {failure.reason}")
    return failure is None


# Programs

def program_scope(program: SourceProgram, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Scope:
    """Contexts for the declared free names; the last declaration is index 0."""
    decls = tuple(reversed(program.decls))
    for decl in decls:
        validate_type(decl.type, algebras)
        if not pair_in(algebras.resolve(decl.usage.alg), decl.usage):
            raise AlgebraError(f"Usage of '{decl.name}' is not in algebra '{decl.usage.alg}'")
    return Scope(
        pre=tuple(decl.type for decl in decls),
        idxs=tuple(decl.usage.alg for decl in decls),
        ctx=tuple(decl.usage for decl in decls),
    )


def check_program(program: SourceProgram, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> CheckedProgram:
    names = program.names
    scope = program_scope(program, algebras)
    process = from_raw(names, program.body, well_scoped(names, program.body))
    derivation, leftover = check(scope.pre, scope.idxs, scope.ctx, process, algebras)
    logger.info(f"Program with {len(names)} free names checked, leftover of length {len(leftover)}")
    return CheckedProgram(names=tuple(names), scope=scope, process=process, derivation=derivation)
