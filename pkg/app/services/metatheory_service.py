"""Typing metatheory as derivation transformers.

Every transformer walks a derivation node by node, rewrites the stored
contexts and variable references, and leaves rule validity to `recheck`.
Positions are addressed from the root of the transformed derivation: under
k binders an outer position p lives at p + k.
"""
import logging
import random
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from app import config
from app.errors import (
    EvidenceMismatch, FrameUndefined, IndexOutOfRange, LeftoverPiError, MissingCapability, NoCapability,
    PathError, StepNotDerivable, TransformError, UsedVariable,
)
from app.models.derivation import Derivation, SplitEvidence, SubstEvidence, VarRefArrow
from app.models.report import GeneratedProcess, PropertyFailure, PropertyReport, PropertyRun
from app.models.semantics import (
    CongPath, CongRule, Direction, ReductionStep, Selector, TraceEntry, TypedTraceEntry, external,
)
from app.models.types import Ctx, Idxs, NuAnnot, PreCtx, Type, UnitType, UsagePair
from app.services.algebra_service import (
    DEFAULT_ALGEBRAS, AlgebraSet, both_pair, split_ctx, split_pair, zero_pair,
)
from app.services.checker_service import (
    CHILD_SELECTORS, check, derivation_subject, make_end, make_par, make_res, recheck, recheck_report,
)
from app.services.context_service import consume_var, delete_at, insert_at, replace_at, swap_at
from app.services.generator_service import gen_well_typed
from app.services.printer_service import show_process
from app.services.scope_service import (
    alpha_equivalent, exchange, from_raw, is_barendregt, lift, subst, to_raw, unused,
)
from app.services.semantics_service import (
    apply_cong, default_end_annot, first_step, process_eq, reductions, spend_annotation,
)

logger = logging.getLogger(__name__)

CtxFn = Callable[[int, Ctx], Ctx]
VarFn = Callable[[int, int], int]


def _map_derivation(
    d: Derivation,
    ctx_fn: CtxFn,
    var_fn: VarFn,
    pre_fn: Callable[[int, PreCtx], PreCtx] = lambda k, pre: pre,
    idxs_fn: Callable[[int, Idxs], Idxs] = lambda k, idxs: idxs,
    k: int = 0,
) -> Derivation:
    child_k = k + 1 if d.kind in ("res", "recv") else k
    update = {
        "pre": pre_fn(k, d.pre),
        "idxs": idxs_fn(k, d.idxs),
        "ctx_in": ctx_fn(k, d.ctx_in),
        "ctx_out": ctx_fn(k, d.ctx_out),
        "children": tuple(_map_derivation(c, ctx_fn, var_fn, pre_fn, idxs_fn, child_k) for c in d.children),
    }
    for field in ("chan_ref", "payload_ref"):
        ref = getattr(d, field)
        if ref is not None:
            update[field] = ref.model_copy(
                update={"index": var_fn(k, ref.index), "leftover": ctx_fn(k, ref.leftover)}
            )
    return d.model_copy(update=update)


def _ensure_valid(d: Derivation, operation: str, algebras: AlgebraSet) -> Derivation:
    failure = recheck_report(d, algebras)
    if failure is not None:
        where = "/".join(failure.path) or "root"
        raise TransformError(f"{operation} produced an invalid derivation at {where}: {failure.reason}")
    return d


# Framing

def split_evidence(d: Derivation, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> SplitEvidence:
    delta = split_ctx(d.ctx_in, d.ctx_out, algebras)
    if delta is None:
        raise TransformError("Derivation output is not a leftover of its input")
    return SplitEvidence(gamma=d.ctx_in, delta=delta, xi=d.ctx_out)


def frame(
    d: Derivation, ev: SplitEvidence, gamma_r: Ctx, algebras: AlgebraSet = DEFAULT_ALGEBRAS
) -> Derivation:
    """Move `d` onto input `gamma_r`, keeping what it consumes."""
    if ev.gamma != d.ctx_in or ev.xi != d.ctx_out:
        raise EvidenceMismatch("split", "evidence does not describe the derivation contexts")
    if split_ctx(ev.gamma, ev.delta, algebras) != ev.xi:
        raise EvidenceMismatch("split", "recorded split does not hold")
    if len(gamma_r) != len(ev.gamma):
        raise FrameUndefined(f"Frame of length {len(gamma_r)} for a context of length {len(ev.gamma)}")
    try:
        xi_r = split_ctx(gamma_r, ev.delta, algebras)
    except LeftoverPiError as exc:
        raise FrameUndefined(exc.message) from exc
    if xi_r is None:
        raise FrameUndefined("Target context cannot provide what the derivation consumes")

    gamma_l = ev.gamma

    def reframe(k: int, ctx: Ctx) -> Ctx:
        mapped = list(ctx[:k])
        for p, have in enumerate(ctx[k:]):
            alg = algebras.resolve(have.alg)
            taken = split_pair(alg, gamma_l[p], have)
            left = split_pair(alg, gamma_r[p], taken) if taken is not None else None
            if left is None:
                raise FrameUndefined(f"Cannot reframe position {p}")
            mapped.append(left)
        return tuple(mapped)

    return _map_derivation(d, reframe, lambda k, v: v)


def frame_to(d: Derivation, gamma_r: Ctx, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Derivation:
    return frame(d, split_evidence(d, algebras), gamma_r, algebras)


# Weakening, strengthening, exchange

def weaken(d: Derivation, i: int, t: Type, x: UsagePair, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Derivation:
    """Insert an unused variable of type `t` and usage `x` at position `i`."""
    if not 0 <= i <= len(d.pre):
        raise IndexOutOfRange(i, len(d.pre) + 1)
    algebras.resolve(x.alg)
    return _map_derivation(
        d,
        lambda k, ctx: insert_at(ctx, i + k, x),
        lambda k, v: v + 1 if v >= i + k else v,
        lambda k, pre: insert_at(pre, i + k, t),
        lambda k, idxs: insert_at(idxs, i + k, x.alg),
    )


def unused_preserved(d: Derivation, i: int) -> bool:
    """An unused variable keeps the same usage in every context of the derivation."""
    if not unused(i, derivation_subject(d)):
        return False

    def visit(node: Derivation, k: int) -> bool:
        position = i + k
        if node.ctx_in[position] != node.ctx_out[position]:
            return False
        for ref in (node.chan_ref, node.payload_ref):
            if ref is not None and ref.leftover[position] != node.ctx_in[position]:
                return False
        child_k = k + 1 if node.kind in ("res", "recv") else k
        return all(visit(child, child_k) for child in node.children)

    return visit(d, 0)


def strengthen(d: Derivation, i: int) -> Derivation:
    """Remove the unused variable at position `i`."""
    if not 0 <= i < len(d.pre):
        raise IndexOutOfRange(i, len(d.pre))
    if not unused(i, derivation_subject(d)):
        raise UsedVariable(i)
    return _map_derivation(
        d,
        lambda k, ctx: delete_at(ctx, i + k),
        lambda k, v: v - 1 if v > i + k else v,
        lambda k, pre: delete_at(pre, i + k),
        lambda k, idxs: delete_at(idxs, i + k),
    )


def exchange_deriv(d: Derivation, i: int) -> Derivation:
    """Swap positions `i` and `i + 1`."""
    if i < 0 or i + 1 >= len(d.pre):
        raise IndexOutOfRange(i + 1, len(d.pre))

    def swap(k: int, v: int) -> int:
        if v == i + k:
            return v + 1
        if v == i + k + 1:
            return v - 1
        return v

    return _map_derivation(
        d,
        lambda k, ctx: swap_at(ctx, i + k),
        swap,
        lambda k, pre: swap_at(pre, i + k),
        lambda k, idxs: swap_at(idxs, i + k),
    )


# Substitution

def validate_arrow(
    name: str, arrow: VarRefArrow, pre: PreCtx, idxs: Idxs, algebras: AlgebraSet = DEFAULT_ALGEBRAS
) -> None:
    try:
        t, leftover = consume_var(pre, idxs, arrow.ctx_in, arrow.index, arrow.demanded, algebras)
    except LeftoverPiError as exc:
        raise EvidenceMismatch(name, exc.message) from exc
    if t != arrow.type:
        raise EvidenceMismatch(name, "recorded type differs from the context")
    if leftover != arrow.ctx_out:
        raise EvidenceMismatch(name, "recorded leftover differs")


def subst_deriv(
    d: Derivation, i: int, j: int, ev: SubstEvidence, algebras: AlgebraSet = DEFAULT_ALGEBRAS
) -> Derivation:
    """Transfer every reference to `i` onto `j`.

    Input moves from gamma_i to gamma_j and output from psi_i to psi_j.
    """
    for name, arrow, index in (
        ("gamma_i", ev.gamma_i, i), ("gamma_j", ev.gamma_j, j), ("psi_i", ev.psi_i, i), ("psi_j", ev.psi_j, j),
    ):
        if arrow.index != index:
            raise EvidenceMismatch(name, f"refers to {arrow.index}, expected {index}")
        validate_arrow(name, arrow, d.pre, d.idxs, algebras)
    if ev.gamma_i.ctx_in != d.ctx_in:
        raise EvidenceMismatch("gamma_i", "does not start from the derivation input")
    if ev.psi_i.ctx_in != d.ctx_out:
        raise EvidenceMismatch("psi_i", "does not start from the derivation output")
    if ev.gamma_j.demanded != ev.gamma_i.demanded or ev.gamma_j.ctx_out != ev.gamma_i.ctx_out:
        raise EvidenceMismatch("gamma_j", "must take the same usage to the same context")
    if ev.psi_j.demanded != ev.psi_i.demanded or ev.psi_j.ctx_out != ev.psi_i.ctx_out:
        raise EvidenceMismatch("psi_j", "must take the same usage to the same context")
    gamma, psi = ev.gamma_i.ctx_out, ev.psi_i.ctx_out
    if split_ctx(gamma, ev.delta, algebras) != psi:
        raise EvidenceMismatch("delta", "split does not produce psi")
    if ev.delta[i] != zero_pair(algebras.resolve(d.idxs[i])):
        raise EvidenceMismatch("delta", f"position {i} must be zero")
    if i == j:
        return d

    gamma_i, gamma_j = ev.gamma_i.ctx_in, ev.gamma_j.ctx_in
    alg = algebras.resolve(d.idxs[j])

    def transfer(k: int, ctx: Ctx) -> Ctx:
        taken_j = split_pair(alg, gamma_i[j], ctx[j + k])
        taken_i = split_pair(alg, gamma_i[i], ctx[i + k])
        moved = None
        if taken_i is not None and taken_j is not None:
            partial = split_pair(alg, gamma_j[j], taken_j)
            moved = split_pair(alg, partial, taken_i) if partial is not None else None
        if moved is None:
            raise TransformError(f"Usage at {i} cannot be carried by {j}")
        return replace_at(replace_at(ctx, j + k, moved), i + k, gamma[i])

    result = _map_derivation(d, transfer, lambda k, v: j + k if v == i + k else v)
    if result.ctx_in != gamma_j or result.ctx_out != ev.psi_j.ctx_in:
        raise TransformError("Substitution did not reach the promised contexts")
    return result


def _combine(pair_a: UsagePair, pair_b: UsagePair, algebras: AlgebraSet) -> Optional[UsagePair]:
    alg = algebras.resolve(pair_a.alg)
    left = alg.combine(pair_a.input, pair_b.input)
    right = alg.combine(pair_a.output, pair_b.output)
    if left is None or right is None:
        return None
    return UsagePair(alg=pair_a.alg, input=left, output=right)


def substitution_evidence(
    d: Derivation, i: int, j: int, algebras: AlgebraSet = DEFAULT_ALGEBRAS
) -> SubstEvidence:
    """Evidence that moves everything `d` consumes at `i` onto `j`."""
    alg = algebras.resolve(d.idxs[i])
    gamma_i, psi_i = d.ctx_in, d.ctx_out
    m = split_pair(alg, gamma_i[i], psi_i[i])
    if m is None:
        raise TransformError(f"Output at {i} is not a leftover of the input")
    n = zero_pair(alg)
    gamma = replace_at(gamma_i, i, psi_i[i])
    grown = _combine(m, gamma[j], algebras) if d.idxs[j] == d.idxs[i] else None
    if grown is None:
        raise TransformError(f"Position {j} cannot absorb the usage of {i}")
    gamma_j = replace_at(gamma, j, grown)
    delta = split_ctx(gamma, psi_i, algebras)
    if delta is None:
        raise TransformError("Output is not a leftover of the transferred input")
    t = d.pre[i]
    return SubstEvidence(
        gamma_i=VarRefArrow(index=i, type=t, demanded=m, ctx_in=gamma_i, ctx_out=gamma),
        gamma_j=VarRefArrow(index=j, type=d.pre[j], demanded=m, ctx_in=gamma_j, ctx_out=gamma),
        psi_i=VarRefArrow(index=i, type=t, demanded=n, ctx_in=psi_i, ctx_out=psi_i),
        psi_j=VarRefArrow(index=j, type=d.pre[j], demanded=n, ctx_in=psi_i, ctx_out=psi_i),
        delta=delta,
    )


def substitute_zero(
    d: Derivation, j: int, arrow: VarRefArrow, algebras: AlgebraSet = DEFAULT_ALGEBRAS
) -> Derivation:
    """Replace the innermost variable of `d` by outer variable `j` and drop the binder.

    `d` must exhaust position 0. `arrow` takes the usage bound at 0 from `j`
    in the new input context; the result types lower(0, subst(P, 1 + j, 0))
    starting from `arrow.ctx_in`.
    """
    outer_pre, outer_idxs = d.pre[1:], d.idxs[1:]
    if arrow.index != j:
        raise EvidenceMismatch("payload", f"refers to {arrow.index}, expected {j}")
    validate_arrow("payload", arrow, outer_pre, outer_idxs, algebras)
    m = d.ctx_in[0]
    if arrow.demanded != m or arrow.type != d.pre[0]:
        raise EvidenceMismatch("payload", "must provide the bound variable's type and usage")

    framed = frame_to(d, (m,) + arrow.ctx_out, algebras)
    zero = zero_pair(algebras.resolve(d.idxs[0]))
    if framed.ctx_out[0] != zero:
        raise TransformError("Bound variable is not exhausted")
    gamma = (zero,) + arrow.ctx_out
    psi = framed.ctx_out
    delta = split_ctx(gamma, psi, algebras)
    if delta is None:
        raise TransformError("Framed output is not a leftover of the substituted input")
    t = d.pre[0]
    ev = SubstEvidence(
        gamma_i=VarRefArrow(index=0, type=t, demanded=m, ctx_in=framed.ctx_in, ctx_out=gamma),
        gamma_j=VarRefArrow(index=j + 1, type=t, demanded=m, ctx_in=(zero,) + arrow.ctx_in, ctx_out=gamma),
        psi_i=VarRefArrow(index=0, type=t, demanded=zero, ctx_in=psi, ctx_out=psi),
        psi_j=VarRefArrow(index=j + 1, type=t, demanded=zero, ctx_in=psi, ctx_out=psi),
        delta=delta,
    )
    return strengthen(subst_deriv(framed, 0, j + 1, ev, algebras), 0)


# Structural congruence

def _replace_at(d: Derivation, path: Sequence[Selector], fn: Callable[[Derivation], Derivation]) -> Derivation:
    if not path:
        replaced = fn(d)
        if replaced.ctx_in != d.ctx_in or replaced.ctx_out != d.ctx_out:
            raise TransformError("Rewritten subderivation changed its contexts")
        return replaced
    selectors = CHILD_SELECTORS[d.kind]
    if path[0] not in selectors:
        raise PathError(f"Selector {path[0].value} does not apply to a '{d.kind}' derivation")
    position = selectors.index(path[0])
    children = list(d.children)
    children[position] = _replace_at(children[position], path[1:], fn)
    return d.model_copy(update={"children": tuple(children)})


def _cong_node(
    node: Derivation, rule: CongRule, forward: bool, annot: Optional[NuAnnot], hint: Optional[str],
    algebras: AlgebraSet,
) -> Derivation:
    if rule == CongRule.COMP_ASSOC:
        if forward:
            left, rest = node.children
            middle, right = rest.children
            return make_par(make_par(left, middle), right)
        rest, right = node.children
        left, middle = rest.children
        return make_par(left, make_par(middle, right))

    if rule == CongRule.COMP_SYM:
        left, right = node.children
        first = frame_to(right, node.ctx_in, algebras)
        second = frame_to(left, first.ctx_out, algebras)
        return make_par(first, second)

    if rule == CongRule.COMP_ID:
        if forward:
            return node.children[0]
        return make_par(node, make_end(node.pre, node.idxs, node.ctx_out))

    if rule == CongRule.SCOPE_END:
        if forward:
            return make_end(node.pre, node.idxs, node.ctx_in)
        annot = annot or default_end_annot()
        slot = annot.slot_usage
        if slot != zero_pair(algebras.resolve(annot.chan_alg)):
            raise TransformError("A restriction around end needs a zero multiplicity")
        child = make_end((annot.channel_type,) + node.pre, (annot.chan_alg,) + node.idxs, (slot,) + node.ctx_in)
        return make_res(hint or "_", annot, child)

    if rule == CongRule.SCOPE_EXT:
        if forward:
            left, right = node.children[0].children
            return make_par(make_res(node.hint, node.annot, left), strengthen(right, 0))
        res, right = node.children
        channel = res.annot
        weakened = weaken(right, 0, channel.channel_type, zero_pair(algebras.resolve(channel.chan_alg)), algebras)
        return make_res(res.hint, res.annot, make_par(res.children[0], weakened))

    if rule == CongRule.SCOPE_COMM:
        inner = node.children[0]
        swapped = exchange_deriv(inner.children[0], 0)
        return make_res(inner.hint, inner.annot, make_res(node.hint, node.annot, swapped))

    raise TransformError(f"Unknown rule {rule}")


def _subject_cong_unchecked(
    d: Derivation,
    rule: CongRule,
    path: CongPath,
    direction: Direction,
    annot: Optional[NuAnnot],
    hint: Optional[str],
    algebras: AlgebraSet,
) -> Derivation:
    forward = direction == Direction.FORWARD
    return _replace_at(d, tuple(path), lambda node: _cong_node(node, rule, forward, annot, hint, algebras))


def subject_cong(
    d: Derivation,
    rule: CongRule,
    path: CongPath,
    direction: Direction = Direction.FORWARD,
    annot: Optional[NuAnnot] = None,
    hint: Optional[str] = None,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> Derivation:
    """Derivation of the rewritten process under the same root contexts."""
    expected = apply_cong(rule, path, derivation_subject(d), direction, annot, hint)
    result = _subject_cong_unchecked(d, rule, path, direction, annot, hint, algebras)
    if derivation_subject(result) != expected:
        raise TransformError(f"{rule.value} derivation does not type the rewritten process")
    return _ensure_valid(result, rule.value, algebras)


# Reduction

def _comm_case(d: Derivation, algebras: AlgebraSet) -> Derivation:
    if d.kind != "par" or d.children[0].kind != "recv" or d.children[1].kind != "send":
        raise TransformError("Redex must be an input in parallel with an output")
    receiver, sender = d.children
    i = receiver.chan_ref.index
    try:
        _, local = consume_var(d.pre, d.idxs, d.ctx_in, i, both_pair(algebras.resolve(d.idxs[i])), algebras)
    except LeftoverPiError as exc:
        raise NoCapability(f"Channel {i} lacks one input and one output: {exc.message}") from exc
    payload = sender.payload_ref
    _, after = consume_var(d.pre, d.idxs, local, payload.index, payload.demanded, algebras)
    arrow = VarRefArrow(
        index=payload.index, type=d.pre[payload.index], demanded=payload.demanded, ctx_in=local, ctx_out=after
    )
    left = substitute_zero(receiver.children[0], payload.index, arrow, algebras)
    right = frame_to(sender.children[0], left.ctx_out, algebras)
    return make_par(left, right)


def _reduce_at(d: Derivation, path: Sequence[Selector], algebras: AlgebraSet) -> Derivation:
    if not path:
        return _comm_case(d, algebras)
    selector, rest = path[0], path[1:]
    if selector == Selector.RES_BODY and d.kind == "res":
        body = _reduce_at(d.children[0], rest, algebras)
        annot = d.annot
        if body.ctx_in[0] != annot.slot_usage:
            annot = spend_annotation(annot, algebras)
            if body.ctx_in[0] != annot.slot_usage:
                raise TransformError("Restricted channel lost more than one communication")
        return make_res(d.hint, annot, body)
    if selector == Selector.PAR_LEFT and d.kind == "par":
        left = _reduce_at(d.children[0], rest, algebras)
        right = d.children[1]
        if left.ctx_out != right.ctx_in:
            raise TransformError("Reduct leaves a different context for its right neighbour")
        return make_par(left, right)
    raise TransformError(f"No reduction context descends through {selector.value} of '{d.kind}'")


def subject_reduction(
    d: Derivation,
    step: ReductionStep,
    capability: Optional[VarRefArrow] = None,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
    available: Optional[Sequence[ReductionStep]] = None,
) -> Derivation:
    """Derivation of the reduct of `step`.

    Internal steps keep the root input; a step on free channel i starts from
    the input with one input and one output taken at i. Callers that already
    enumerated the reductions of `d` pass them as `available`.

    The recorded rewrites are replayed without intermediate rechecks; the
    final derivation is rechecked once.
    """
    if available is None:
        available = reductions(derivation_subject(d), algebras)
    if step not in available:
        raise StepNotDerivable("Step is not a reduction of the typed process")
    expected_in = d.ctx_in
    if step.channel.kind == "external":
        if capability is None:
            raise MissingCapability(f"Step on free channel {step.channel.index} needs a capability")
        i = step.channel.index
        if capability.index != i or capability.ctx_in != d.ctx_in:
            raise EvidenceMismatch("capability", "must start from the root input at the step channel")
        if capability.demanded != both_pair(algebras.resolve(d.idxs[i])):
            raise EvidenceMismatch("capability", "must take one input and one output")
        validate_arrow("capability", capability, d.pre, d.idxs, algebras)
        expected_in = capability.ctx_out

    current = d
    for rewrite in step.rewrites:
        current = _subject_cong_unchecked(current, rewrite.rule, rewrite.path, rewrite.direction, None, None, algebras)
    result = _reduce_at(current, step.redex, algebras)

    if not process_eq(derivation_subject(result), step.process):
        raise TransformError("Reduced derivation does not type the reduct")
    if result.ctx_in != expected_in or result.ctx_out != d.ctx_out:
        raise TransformError("Reduced derivation has unexpected root contexts")
    logger.debug(f"subject reduction on {step.channel.kind} channel")
    return _ensure_valid(result, "subject reduction", algebras)


def derive_capability(
    d: Derivation,
    i: int,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
    available: Optional[Sequence[ReductionStep]] = None,
) -> VarRefArrow:
    """One input and one output at free channel `i`, available whenever `i` can reduce."""
    channel = external(i)
    if available is None:
        available = reductions(derivation_subject(d), algebras)
    if not any(step.channel == channel for step in available):
        raise NoCapability(f"No reduction on free channel {i}")
    demanded = both_pair(algebras.resolve(d.idxs[i]))
    try:
        t, leftover = consume_var(d.pre, d.idxs, d.ctx_in, i, demanded, algebras)
    except LeftoverPiError as exc:
        raise NoCapability(f"Channel {i} cannot provide one input and one output: {exc.message}") from exc
    return VarRefArrow(index=i, type=t, demanded=demanded, ctx_in=d.ctx_in, ctx_out=leftover)


# Property suites

Predicate = Callable[[GeneratedProcess, AlgebraSet], Optional[str]]


def _typed(generated: GeneratedProcess, algebras: AlgebraSet) -> Derivation:
    derivation, _ = check(generated.pre, generated.idxs, generated.ctx, generated.process, algebras)
    return derivation


def prop_subject_reduction(generated: GeneratedProcess, algebras: AlgebraSet) -> Optional[str]:
    d = _typed(generated, algebras)
    available = reductions(generated.process, algebras)
    for step in available:
        capability = None
        expected_in = d.ctx_in
        if step.channel.kind == "external":
            capability = derive_capability(d, step.channel.index, algebras, available)
            expected_in = capability.ctx_out
        reduced = subject_reduction(d, step, capability, algebras, available)
        if reduced.ctx_in != expected_in:
            return "reduct does not start from the expected input"
        _, leftover = check(generated.pre, generated.idxs, expected_in, step.process, algebras)
        if leftover != d.ctx_out:
            return "checker disagrees with the transformed leftover"
    return None


def prop_weaken_strengthen(generated: GeneratedProcess, algebras: AlgebraSet) -> Optional[str]:
    d = _typed(generated, algebras)
    rng = random.Random(generated.seed)
    i = rng.randint(0, len(d.pre))
    idx = rng.choice(sorted(algebras))
    weakened = weaken(d, i, UnitType(), zero_pair(algebras.resolve(idx)), algebras)
    if not recheck(weakened, algebras):
        return "weakened derivation does not recheck"
    if derivation_subject(weakened) != lift(i, generated.process):
        return "weakening does not type the lifted process"
    if not unused_preserved(weakened, i):
        return "inserted variable changes usage"
    if strengthen(weakened, i) != d:
        return "strengthening does not undo weakening"
    return None


def prop_exchange(generated: GeneratedProcess, algebras: AlgebraSet) -> Optional[str]:
    d = _typed(generated, algebras)
    if len(d.pre) < 2:
        return None
    i = random.Random(generated.seed).randint(0, len(d.pre) - 2)
    swapped = exchange_deriv(d, i)
    if not recheck(swapped, algebras):
        return "exchanged derivation does not recheck"
    if derivation_subject(swapped) != exchange(i, generated.process):
        return "exchange does not type the exchanged process"
    if exchange_deriv(swapped, i) != d:
        return "exchange is not an involution"
    return None


def _enlarge(ctx: Ctx, rng: random.Random, algebras: AlgebraSet) -> Ctx:
    enlarged = []
    for pair in ctx:
        alg = algebras.resolve(pair.alg)
        extra = UsagePair(alg=pair.alg, input=rng.choice(alg.samples(2)), output=rng.choice(alg.samples(2)))
        enlarged.append(_combine(extra, pair, algebras) or pair)
    return tuple(enlarged)


def prop_frame(generated: GeneratedProcess, algebras: AlgebraSet) -> Optional[str]:
    d = _typed(generated, algebras)
    gamma_r = _enlarge(d.ctx_in, random.Random(generated.seed), algebras)
    framed = frame_to(d, gamma_r, algebras)
    if not recheck(framed, algebras):
        return "framed derivation does not recheck"
    if framed.ctx_in != gamma_r:
        return "framed derivation does not start from the frame"
    if frame_to(framed, d.ctx_in, algebras) != d:
        return "framing back does not restore the derivation"
    return None


def prop_subst(generated: GeneratedProcess, algebras: AlgebraSet) -> Optional[str]:
    d = _typed(generated, algebras)
    if not d.pre:
        return None
    i = random.Random(generated.seed).randrange(len(d.pre))
    # a fresh copy of variable i at 0 receives all of its uses
    copy = weaken(d, 0, d.pre[i], zero_pair(algebras.resolve(d.idxs[i])), algebras)
    ev = substitution_evidence(copy, i + 1, 0, algebras)
    moved = subst_deriv(copy, i + 1, 0, ev, algebras)
    if not recheck(moved, algebras):
        return "substituted derivation does not recheck"
    if derivation_subject(moved) != subst(derivation_subject(copy), 0, i + 1):
        return "substitution does not type the substituted process"
    if not unused_preserved(moved, i + 1):
        return "source variable is still used after substitution"
    return None


def prop_roundtrip(generated: GeneratedProcess, algebras: AlgebraSet) -> Optional[str]:
    names = [f"n{k}" for k in range(len(generated.pre))]
    raw = to_raw(names, generated.process)
    if not is_barendregt(names, raw):
        return "named process reuses a binder name"
    if from_raw(names, raw) != generated.process:
        return "from_raw does not invert to_raw"
    if not alpha_equivalent(to_raw(names, from_raw(names, raw)), raw):
        return "to_raw after from_raw is not alpha equivalent"
    return None


PROPERTY_SUITE: Dict[str, Predicate] = {
    "subject_reduction": prop_subject_reduction,
    "weaken_strengthen": prop_weaken_strengthen,
    "exchange": prop_exchange,
    "frame": prop_frame,
    "subst": prop_subst,
    "roundtrip": prop_roundtrip,
}


def _attempt(predicate: Predicate, generated: GeneratedProcess, algebras: AlgebraSet) -> Optional[str]:
    try:
        return predicate(generated, algebras)
    except LeftoverPiError as exc:
        return f"{type(exc).__name__}: {exc}"


def _minimise(
    predicate: Predicate, seed: int, budget: int, reason: str, generated: GeneratedProcess,
    mix: Sequence[str], algebras: AlgebraSet,
) -> PropertyFailure:
    smallest = (budget, generated, reason)
    for smaller in range(budget - 1, -1, -1):
        candidate = gen_well_typed(seed, smaller, mix, algebras)
        failure = _attempt(predicate, candidate, algebras)
        if failure is not None:
            smallest = (smaller, candidate, failure)
    found_budget, found, found_reason = smallest
    return PropertyFailure(seed=seed, budget=found_budget, process=show_process(found.process), reason=found_reason)


def run_property(
    name: str,
    predicate: Optional[Predicate] = None,
    samples: int = config.PROPERTY_SAMPLES,
    seed: int = config.PROPERTY_SEED,
    budget: int = config.PROPERTY_BUDGET,
    mix: Sequence[str] = config.DEFAULT_ALGEBRA_MIX,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> PropertyReport:
    """Check `predicate` on `samples` generated processes, seeds counting up from `seed`."""
    predicate = predicate or PROPERTY_SUITE[name]
    for n in range(samples):
        sample_seed = seed + n
        generated = gen_well_typed(sample_seed, budget, mix, algebras)
        reason = _attempt(predicate, generated, algebras)
        if reason is not None:
            failure = _minimise(predicate, sample_seed, budget, reason, generated, mix, algebras)
            logger.warning(f"Property {name} failed on seed {sample_seed}: {failure.reason}")
            return PropertyReport(
                name=name, seed=seed, samples=samples, budget=budget, passed=n, failure=failure
            )
    logger.info(f"Property {name} passed {samples} samples")
    return PropertyReport(name=name, seed=seed, samples=samples, budget=budget, passed=samples)


def run_suite(
    names: Optional[Iterable[str]] = None,
    samples: int = config.PROPERTY_SAMPLES,
    seed: int = config.PROPERTY_SEED,
    budget: int = config.PROPERTY_BUDGET,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> PropertyRun:
    selected: List[str] = list(names) if names else list(PROPERTY_SUITE)
    reports = tuple(
        run_property(name, samples=samples, seed=seed, budget=budget, algebras=algebras) for name in selected
    )
    return PropertyRun(reports=reports)


# Traces that carry their typing along

def typed_trace(
    d: Derivation,
    steps: Optional[int] = None,
    to_end: bool = False,
    chooser: Callable[[List[ReductionStep]], ReductionStep] = first_step,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> List[TypedTraceEntry]:
    """Run the typed process, transforming its derivation along every step."""
    limit = config.REDUCE_STEP_LIMIT if to_end or steps is None else steps
    entries: List[TypedTraceEntry] = []
    current = d
    while len(entries) < limit:
        available = reductions(derivation_subject(current), algebras)
        if not available:
            break
        step = chooser(available)
        capability = None
        if step.channel.kind == "external":
            capability = derive_capability(current, step.channel.index, algebras, available)
        current = subject_reduction(current, step, capability, algebras, available)
        entry = TraceEntry(step=len(entries) + 1, channel=step.channel, process=step.process)
        entries.append(TypedTraceEntry(entry=entry, ctx_in=current.ctx_in, ctx_out=current.ctx_out))
    logger.info(f"Typed trace ran {len(entries)} steps")
    return entries
