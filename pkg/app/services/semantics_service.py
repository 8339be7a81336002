import logging
from typing import Callable, List, Optional, Sequence, Tuple

from app import config
from app.errors import PathError, RewriteError, ShapeMismatch, UnusedViolation
from app.models.process import End, Name, Par, Process, Recv, Res, Send
from app.models.semantics import (
    INTERNAL, Channel, CongPath, CongRule, CongStep, Direction, ReductionStep, Selector,
    TraceEntry, external,
)
from app.models.types import NuAnnot, UnitType
from app.services.algebra_service import DEFAULT_ALGEBRAS, AlgebraSet, LinearAlgebra, zero_pair
from app.services.scope_service import erase_hints, exchange, lift, lower, subst, unused

logger = logging.getLogger(__name__)

DEFAULT_END_HINT = "_"


def default_end_annot() -> NuAnnot:
    linear = LinearAlgebra()
    return NuAnnot(
        payload_type=UnitType(), payload_usage=zero_pair(linear), chan_alg=linear.name, chan_mult=linear.zero
    )


# Paths

def subterm(p: Process, path: Sequence[Selector]) -> Process:
    node = p
    for selector in path:
        node = _child(node, selector)
    return node


def _child(node: Process, selector: Selector) -> Process:
    if selector == Selector.RES_BODY and isinstance(node, Res):
        return node.body
    if selector == Selector.PAR_LEFT and isinstance(node, Par):
        return node.left
    if selector == Selector.PAR_RIGHT and isinstance(node, Par):
        return node.right
    if selector == Selector.RECV_BODY and isinstance(node, Recv):
        return node.body
    if selector == Selector.SEND_BODY and isinstance(node, Send):
        return node.body
    raise PathError(f"Selector {selector.value} does not apply to a '{node.kind}' node")


def replace_subterm(p: Process, path: Sequence[Selector], fn: Callable[[Process], Process]) -> Process:
    """Rebuild `p` with the subterm at `path` replaced by `fn(subterm)`; depths must agree."""
    if not path:
        result = fn(p)
        if result.depth != p.depth:
            raise RewriteError("Rewrite changed the depth of the subterm")
        return result
    selector, rest = path[0], path[1:]
    child = _child(p, selector)
    replaced = replace_subterm(child, rest, fn)
    if selector == Selector.PAR_LEFT:
        return p.model_copy(update={"left": replaced})
    if selector == Selector.PAR_RIGHT:
        return p.model_copy(update={"right": replaced})
    return p.model_copy(update={"body": replaced})


# Congruence rules

def _rewrite(
    rule: CongRule, direction: Direction, p: Process, annot: Optional[NuAnnot], hint: Optional[Name]
) -> Process:
    forward = direction == Direction.FORWARD
    d = p.depth

    if rule == CongRule.COMP_ASSOC:
        if forward and isinstance(p, Par) and isinstance(p.right, Par):
            return Par(depth=d, left=Par(depth=d, left=p.left, right=p.right.left), right=p.right.right)
        if not forward and isinstance(p, Par) and isinstance(p.left, Par):
            return Par(depth=d, left=p.left.left, right=Par(depth=d, left=p.left.right, right=p.right))
        raise ShapeMismatch(f"{rule.value} {direction.value} needs a nested parallel composition")

    if rule == CongRule.COMP_SYM:
        if isinstance(p, Par):
            return Par(depth=d, left=p.right, right=p.left)
        raise ShapeMismatch(f"{rule.value} needs a parallel composition")

    if rule == CongRule.COMP_ID:
        if forward:
            if isinstance(p, Par) and isinstance(p.right, End):
                return p.left
            raise ShapeMismatch(f"{rule.value} forward needs 'P | end'")
        return Par(depth=d, left=p, right=End(depth=d))

    if rule == CongRule.SCOPE_END:
        if forward:
            if isinstance(p, Res) and isinstance(p.body, End):
                return End(depth=d)
            raise ShapeMismatch(f"{rule.value} forward needs 'new end'")
        if not isinstance(p, End):
            raise ShapeMismatch(f"{rule.value} backward needs 'end'")
        return Res(
            depth=d, hint=hint or DEFAULT_END_HINT, annot=annot or default_end_annot(), body=End(depth=d + 1)
        )

    if rule == CongRule.SCOPE_EXT:
        if forward:
            if not (isinstance(p, Res) and isinstance(p.body, Par)):
                raise ShapeMismatch(f"{rule.value} forward needs 'new (P | Q)'")
            right = p.body.right
            if not unused(0, right):
                raise UnusedViolation("Right component uses the restricted channel")
            return Par(
                depth=d,
                left=Res(depth=d, hint=p.hint, annot=p.annot, body=p.body.left),
                right=lower(0, right, True),
            )
        if not (isinstance(p, Par) and isinstance(p.left, Res)):
            raise ShapeMismatch(f"{rule.value} backward needs '(new P) | Q'")
        inner = p.left
        return Res(
            depth=d, hint=inner.hint, annot=inner.annot,
            body=Par(depth=d + 1, left=inner.body, right=lift(0, p.right)),
        )

    if rule == CongRule.SCOPE_COMM:
        if isinstance(p, Res) and isinstance(p.body, Res):
            inner = p.body
            return Res(
                depth=d, hint=inner.hint, annot=inner.annot,
                body=Res(depth=d + 1, hint=p.hint, annot=p.annot, body=exchange(0, inner.body)),
            )
        raise ShapeMismatch(f"{rule.value} needs two nested restrictions")

    raise ShapeMismatch(f"Unknown rule {rule}")


def apply_cong(
    rule: CongRule,
    path: Sequence[Selector],
    p: Process,
    direction: Direction = Direction.FORWARD,
    annot: Optional[NuAnnot] = None,
    hint: Optional[Name] = None,
) -> Process:
    """Rewrite the subterm at `path` by one structural congruence rule."""
    return replace_subterm(p, tuple(path), lambda node: _rewrite(rule, direction, node, annot, hint))


def apply_step(step: CongStep, p: Process) -> Process:
    return apply_cong(step.rule, step.path, p, step.direction)


class Normalizer:
    """Applies congruence steps to a process and records them."""

    def __init__(self, process: Process):
        self.process = process
        self.steps: List[CongStep] = []

    def at(self, path: CongPath) -> Process:
        return subterm(self.process, path)

    def apply(self, rule: CongRule, direction: Direction, path: CongPath):
        step = CongStep(rule=rule, direction=direction, path=path)
        self.process = apply_step(step, self.process)
        self.steps.append(step)
        logger.debug(f"rewrite {rule.value} {direction.value} at {[s.value for s in path]}")

    def flatten(self, path: CongPath, deep: bool = True):
        """Bring the subterm at `path` to a right-nested spine without `end` components."""
        node = self.at(path)
        if isinstance(node, Par):
            self.flatten(path + (Selector.PAR_LEFT,), deep)
            self.flatten(path + (Selector.PAR_RIGHT,), deep)
            self._merge(path)
        elif deep and isinstance(node, Res):
            self.flatten(path + (Selector.RES_BODY,), deep)
        elif deep and isinstance(node, Recv):
            self.flatten(path + (Selector.RECV_BODY,), deep)
        elif deep and isinstance(node, Send):
            self.flatten(path + (Selector.SEND_BODY,), deep)

    def _merge(self, path: CongPath):
        node = self.at(path)
        if isinstance(node.left, End):
            self.apply(CongRule.COMP_SYM, Direction.FORWARD, path)
            self.apply(CongRule.COMP_ID, Direction.FORWARD, path)
        elif isinstance(node.right, End):
            self.apply(CongRule.COMP_ID, Direction.FORWARD, path)
        elif isinstance(node.left, Par):
            self.apply(CongRule.COMP_ASSOC, Direction.BACKWARD, path)
            self._merge(path + (Selector.PAR_RIGHT,))

    def swap(self, path: CongPath, position: int):
        """Exchange spine components `position` and `position + 1`."""
        at = path + (Selector.PAR_RIGHT,) * position
        if isinstance(self.at(at).right, Par):
            self.apply(CongRule.COMP_ASSOC, Direction.FORWARD, at)
            self.apply(CongRule.COMP_SYM, Direction.FORWARD, at + (Selector.PAR_LEFT,))
            self.apply(CongRule.COMP_ASSOC, Direction.BACKWARD, at)
        else:
            self.apply(CongRule.COMP_SYM, Direction.FORWARD, at)

    def bubble(self, path: CongPath, position: int, target: int = 0):
        for m in range(position - 1, target - 1, -1):
            self.swap(path, m)

    def prenex(self, path: CongPath = ()):
        """Hoist every restriction of the active spine at `path` to the front.

        Prefix bodies are left alone. Restrictions whose body becomes `end`
        are dropped.
        """
        self.flatten(path, deep=False)
        node = self.at(path)
        if isinstance(node, Res):
            self._prenex_res(path)
            return
        components = spine(node)
        position = next((k for k, c in enumerate(components) if isinstance(c, Res)), None)
        if position is None:
            return
        self.bubble(path, position)
        self.apply(CongRule.SCOPE_EXT, Direction.BACKWARD, path)
        self._prenex_res(path)

    def _prenex_res(self, path: CongPath):
        self.prenex(path + (Selector.RES_BODY,))
        if isinstance(self.at(path + (Selector.RES_BODY,)), End):
            self.apply(CongRule.SCOPE_END, Direction.FORWARD, path)


def spine(p: Process) -> List[Process]:
    components = []
    while isinstance(p, Par):
        components.append(p.left)
        p = p.right
    components.append(p)
    return components


def flatten_normalize(p: Process) -> Process:
    normalizer = Normalizer(p)
    normalizer.flatten(())
    return normalizer.process


def flatten_steps(p: Process) -> List[CongStep]:
    normalizer = Normalizer(p)
    normalizer.flatten(())
    return normalizer.steps


def prenex_steps(p: Process) -> List[CongStep]:
    normalizer = Normalizer(p)
    normalizer.prenex()
    return normalizer.steps


def normalize_to_end(p: Process) -> Tuple[Process, List[CongStep]]:
    normalizer = Normalizer(p)
    normalizer.prenex()
    return normalizer.process, normalizer.steps


def process_eq(p: Process, q: Process) -> bool:
    """Index equality ignoring binder hints."""
    return erase_hints(p) == erase_hints(q)


# Reduction

def comm(redex: Par) -> Process:
    """Communicate between `i?(x). P` on the left and `i!j. Q` on the right."""
    recv, send = redex.left, redex.right
    if not (isinstance(recv, Recv) and isinstance(send, Send) and recv.chan == send.chan):
        raise ShapeMismatch("Communication needs an input and an output on the same channel")
    substituted = subst(recv.body, send.payload.index + 1, 0)
    if not unused(0, substituted):
        raise UnusedViolation("Substituted input body still refers to the received name")
    return Par(depth=redex.depth, left=lower(0, substituted, True), right=send.body)


def spend_annotation(annot: Optional[NuAnnot], algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Optional[NuAnnot]:
    """Take one communication off a restriction's own multiplicity."""
    if annot is None:
        return None
    alg = algebras.resolve(annot.chan_alg)
    remaining = alg.split(annot.chan_mult, alg.one)
    if remaining is None:
        return annot
    return annot.model_copy(update={"chan_mult": remaining})


def _close_prefix(node: Process, levels: int, inner: Process, channel: Channel, algebras: AlgebraSet):
    if levels == 0:
        return inner, channel
    body, channel = _close_prefix(node.body, levels - 1, inner, channel, algebras)
    annot = node.annot
    if channel.kind == "external" and channel.index == 0:
        channel = INTERNAL
        annot = spend_annotation(annot, algebras)
    elif channel.kind == "external":
        channel = external(channel.index - 1)
    return Res(depth=node.depth, hint=node.hint, annot=annot, body=body), channel


def reductions(p: Process, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> List[ReductionStep]:
    """Every communication step of `p`, found after bringing it to prenex form."""
    base = Normalizer(p)
    base.prenex()
    prenex = base.process
    levels = 0
    node = prenex
    while isinstance(node, Res):
        node = node.body
        levels += 1
    spine_path: CongPath = (Selector.RES_BODY,) * levels
    components = spine(node)

    steps: List[ReductionStep] = []
    for a, receiver in enumerate(components):
        if not isinstance(receiver, Recv):
            continue
        for b, sender in enumerate(components):
            if b == a or not isinstance(sender, Send) or sender.chan != receiver.chan:
                continue
            normalizer = Normalizer(prenex)
            normalizer.steps = list(base.steps)
            normalizer.bubble(spine_path, a)
            position = b + 1 if b < a else b
            normalizer.bubble(spine_path, position, 1)
            redex_path = spine_path
            if len(components) > 2:
                normalizer.apply(CongRule.COMP_ASSOC, Direction.FORWARD, spine_path)
                redex_path = spine_path + (Selector.PAR_LEFT,)
            reordered = normalizer.process
            channel = external(receiver.chan.index)
            reduced_spine = replace_subterm(subterm(reordered, spine_path), redex_path[levels:], comm)
            result, channel = _close_prefix(reordered, levels, reduced_spine, channel, algebras)
            steps.append(
                ReductionStep(channel=channel, process=result, rewrites=tuple(normalizer.steps), redex=redex_path)
            )
    logger.debug(f"found {len(steps)} reductions")
    return steps


def first_step(steps: List[ReductionStep]) -> ReductionStep:
    return steps[0]


def trace(
    p: Process,
    steps: Optional[int] = None,
    to_end: bool = False,
    chooser: Callable[[List[ReductionStep]], ReductionStep] = first_step,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> List[TraceEntry]:
    """Run `p` for `steps` steps, or until no step is left when `to_end` is set."""
    limit = config.REDUCE_STEP_LIMIT if to_end or steps is None else steps
    entries: List[TraceEntry] = []
    current = p
    while len(entries) < limit:
        available = reductions(current, algebras)
        if not available:
            break
        step = chooser(available)
        current = step.process
        entries.append(TraceEntry(step=len(entries) + 1, channel=step.channel, process=current))
        logger.debug(f"step {len(entries)} on {step.channel.kind}")
    return entries


# Rewrites offered to a user stepping by hand

REWRITE_CHOICES: Tuple[Tuple[CongRule, Direction], ...] = (
    (CongRule.COMP_ASSOC, Direction.FORWARD),
    (CongRule.COMP_ASSOC, Direction.BACKWARD),
    (CongRule.COMP_SYM, Direction.FORWARD),
    (CongRule.COMP_ID, Direction.FORWARD),
    (CongRule.SCOPE_END, Direction.FORWARD),
    (CongRule.SCOPE_EXT, Direction.FORWARD),
    (CongRule.SCOPE_EXT, Direction.BACKWARD),
    (CongRule.SCOPE_COMM, Direction.FORWARD),
)


def subterm_paths(p: Process) -> List[CongPath]:
    """Paths to every subterm of `p`, in pre-order."""
    paths: List[CongPath] = []

    def visit(node: Process, path: CongPath):
        paths.append(path)
        if isinstance(node, Par):
            visit(node.left, path + (Selector.PAR_LEFT,))
            visit(node.right, path + (Selector.PAR_RIGHT,))
        elif isinstance(node, Res):
            visit(node.body, path + (Selector.RES_BODY,))
        elif isinstance(node, Recv):
            visit(node.body, path + (Selector.RECV_BODY,))
        elif isinstance(node, Send):
            visit(node.body, path + (Selector.SEND_BODY,))

    visit(p, ())
    return paths


def applicable_rewrites(p: Process) -> List[CongStep]:
    """Congruence steps that apply somewhere in `p`.

    Rules that apply to every process (adding `| end` or a restriction around
    `end`) are left out.
    """
    steps = []
    for path in subterm_paths(p):
        for rule, direction in REWRITE_CHOICES:
            step = CongStep(rule=rule, direction=direction, path=path)
            try:
                apply_step(step, p)
            except RewriteError:
                continue
            steps.append(step)
    return steps
