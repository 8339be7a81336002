import logging
import re
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from pydantic import BaseModel, ConfigDict

from app.errors import IndexOutOfRange, ScopeDepthError, ScopeError, UnusedViolation
from app.models.process import (
    End, Par, Process, Raw, RawEnd, RawPar, RawRecv, RawRes, RawSend, Recv, Res, Send, Var,
)
from app.models.semantics import Selector
from app.services.context_service import index_of

logger = logging.getLogger(__name__)

SUFFIX = re.compile(r"^(?P<base>.*?)\^(?P<count>[0-9]+)$")


class Resolution(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: Tuple[Selector, ...]
    slot: str
    name: str
    index: int


class ScopeWitness(BaseModel):
    """Outcome of resolving every name occurrence of a raw process against a context."""

    model_config = ConfigDict(frozen=True)

    ok: bool
    resolutions: Tuple[Resolution, ...] = ()
    unresolved: Optional[str] = None
    position: Tuple[Selector, ...] = ()


def var(index: int, depth: int) -> Var:
    return Var(index=index, depth=depth)


# Named syntax

def _lookup(names: Sequence[str], name: str) -> Optional[int]:
    for index, candidate in enumerate(reversed(names)):
        if candidate == name:
            return index
    return None


def well_scoped(ctx: Sequence[str], p: Raw) -> ScopeWitness:
    """Resolve every free occurrence of `p` in `ctx`; the last name of `ctx` is index 0."""
    resolutions: List[Resolution] = []

    def visit(node: Raw, names: List[str], path: Tuple[Selector, ...]) -> Optional[ScopeWitness]:
        def resolve(slot: str, name: str) -> Optional[ScopeWitness]:
            index = _lookup(names, name)
            if index is None:
                return ScopeWitness(ok=False, unresolved=name, position=path)
            resolutions.append(Resolution(path=path, slot=slot, name=name, index=index))
            return None

        if isinstance(node, RawEnd):
            return None
        if isinstance(node, RawRes):
            return visit(node.body, names + [node.binder], path + (Selector.RES_BODY,))
        if isinstance(node, RawPar):
            return visit(node.left, names, path + (Selector.PAR_LEFT,)) or visit(
                node.right, names, path + (Selector.PAR_RIGHT,)
            )
        if isinstance(node, RawRecv):
            return resolve("chan", node.chan) or visit(
                node.body, names + [node.binder], path + (Selector.RECV_BODY,)
            )
        return (
            resolve("chan", node.chan)
            or resolve("payload", node.payload)
            or visit(node.body, names, path + (Selector.SEND_BODY,))
        )

    failure = visit(p, list(ctx), ())
    if failure is not None:
        return failure
    return ScopeWitness(ok=True, resolutions=tuple(resolutions))


def from_raw(ctx: Sequence[str], p: Raw, witness: Optional[ScopeWitness] = None) -> Process:
    """Replace names by de Bruijn indices, keeping binder names without their suffix as hints."""
    witness = witness or well_scoped(ctx, p)
    if not witness.ok:
        raise ScopeError(witness.unresolved or "", [s.value for s in witness.position])
    table: Dict[Tuple[Tuple[Selector, ...], str], int] = {
        (r.path, r.slot): r.index for r in witness.resolutions
    }

    def build(node: Raw, depth: int, path: Tuple[Selector, ...]) -> Process:
        if isinstance(node, RawEnd):
            return End(depth=depth)
        if isinstance(node, RawRes):
            body = build(node.body, depth + 1, path + (Selector.RES_BODY,))
            return Res(depth=depth, hint=split_suffix(node.binder)[0], annot=node.annot, body=body)
        if isinstance(node, RawPar):
            return Par(
                depth=depth,
                left=build(node.left, depth, path + (Selector.PAR_LEFT,)),
                right=build(node.right, depth, path + (Selector.PAR_RIGHT,)),
            )
        if isinstance(node, RawRecv):
            return Recv(
                depth=depth,
                chan=var(table[(path, "chan")], depth),
                hint=split_suffix(node.binder)[0],
                body=build(node.body, depth + 1, path + (Selector.RECV_BODY,)),
            )
        return Send(
            depth=depth,
            chan=var(table[(path, "chan")], depth),
            payload=var(table[(path, "payload")], depth),
            body=build(node.body, depth, path + (Selector.SEND_BODY,)),
        )

    return build(p, len(ctx), ())


def split_suffix(name: str) -> Tuple[str, Optional[int]]:
    match = SUFFIX.match(name)
    if match:
        return match.group("base"), int(match.group("count"))
    return name, None


def to_raw(ctx: Sequence[str], p: Process) -> Raw:
    """Name every binder `hint^k`, numbering each hint base in traversal order.

    Counting starts after the largest suffix already used by a free name, so
    the result satisfies the Barendregt convention.
    """
    if len(ctx) != p.depth:
        raise ScopeDepthError(f"Context of length {len(ctx)} cannot name a process of depth {p.depth}")
    counters: Dict[str, int] = {}
    for name in ctx:
        base, count = split_suffix(name)
        if count is not None:
            counters[base] = max(counters.get(base, 0), count + 1)

    def fresh(hint: str) -> str:
        base, _ = split_suffix(hint)
        count = counters.get(base, 0)
        counters[base] = count + 1
        return f"{base}^{count}"

    def build(node: Process, names: List[str]) -> Raw:
        def name(v: Var) -> str:
            return names[len(names) - 1 - v.index]

        if isinstance(node, End):
            return RawEnd()
        if isinstance(node, Res):
            binder = fresh(node.hint)
            return RawRes(binder=binder, annot=node.annot, body=build(node.body, names + [binder]))
        if isinstance(node, Par):
            left = build(node.left, names)
            return RawPar(left=left, right=build(node.right, names))
        if isinstance(node, Recv):
            binder = fresh(node.hint)
            return RawRecv(chan=name(node.chan), binder=binder, body=build(node.body, names + [binder]))
        return RawSend(chan=name(node.chan), payload=name(node.payload), body=build(node.body, names))

    return build(p, list(ctx))


def raw_free_names(p: Raw) -> List[str]:
    found: List[str] = []

    def note(name: str, bound: Set[str]):
        if name not in bound and name not in found:
            found.append(name)

    def visit(node: Raw, bound: Set[str]):
        if isinstance(node, RawRes):
            visit(node.body, bound | {node.binder})
        elif isinstance(node, RawPar):
            visit(node.left, bound)
            visit(node.right, bound)
        elif isinstance(node, RawRecv):
            note(node.chan, bound)
            visit(node.body, bound | {node.binder})
        elif isinstance(node, RawSend):
            note(node.chan, bound)
            note(node.payload, bound)
            visit(node.body, bound)

    visit(p, set())
    return found


def raw_binders(p: Raw) -> List[str]:
    if isinstance(p, RawRes):
        return [p.binder] + raw_binders(p.body)
    if isinstance(p, RawPar):
        return raw_binders(p.left) + raw_binders(p.right)
    if isinstance(p, RawRecv):
        return [p.binder] + raw_binders(p.body)
    if isinstance(p, RawSend):
        return raw_binders(p.body)
    return []


def is_barendregt(ctx: Iterable[str], p: Raw) -> bool:
    binders = raw_binders(p)
    free = set(ctx) | set(raw_free_names(p))
    return len(binders) == len(set(binders)) and not free.intersection(binders)


def alpha_equivalent(a: Raw, b: Raw) -> bool:
    """Equal up to consistent renaming of bound names; free names compare by text."""

    def resolve(names: List[str], name: str) -> Union[int, str]:
        index = _lookup(names, name)
        return name if index is None else len(names) - 1 - index

    def same(x: Raw, y: Raw, env_x: List[str], env_y: List[str]) -> bool:
        if x.kind != y.kind:
            return False
        if isinstance(x, RawEnd):
            return True
        if isinstance(x, RawRes):
            return x.annot == y.annot and same(x.body, y.body, env_x + [x.binder], env_y + [y.binder])
        if isinstance(x, RawPar):
            return same(x.left, y.left, env_x, env_y) and same(x.right, y.right, env_x, env_y)
        if resolve(env_x, x.chan) != resolve(env_y, y.chan):
            return False
        if isinstance(x, RawRecv):
            return same(x.body, y.body, env_x + [x.binder], env_y + [y.binder])
        return resolve(env_x, x.payload) == resolve(env_y, y.payload) and same(x.body, y.body, env_x, env_y)

    return same(a, b, [], [])


def subst_raw(p: Raw, new: str, old: str) -> Raw:
    """Replace free occurrences of `old` by `new`, stopping at binders of `old`."""

    def rename(name: str) -> str:
        return new if name == old else name

    if isinstance(p, RawEnd):
        return p
    if isinstance(p, RawRes):
        if p.binder == old:
            return p
        return p.model_copy(update={"body": subst_raw(p.body, new, old)})
    if isinstance(p, RawPar):
        return RawPar(left=subst_raw(p.left, new, old), right=subst_raw(p.right, new, old))
    if isinstance(p, RawRecv):
        body = p.body if p.binder == old else subst_raw(p.body, new, old)
        return RawRecv(chan=rename(p.chan), binder=p.binder, body=body)
    return RawSend(chan=rename(p.chan), payload=rename(p.payload), body=subst_raw(p.body, new, old))


# de Bruijn syntax

def map_vars(p: Process, fn: Callable[[int, int], int], delta: int, k: int = 0) -> Process:
    """Rebuild `p` at depth `p.depth + delta`, sending each index v under k binders to fn(k, v)."""
    depth = p.depth + delta
    if isinstance(p, End):
        return End(depth=depth)
    if isinstance(p, Res):
        return Res(depth=depth, hint=p.hint, annot=p.annot, body=map_vars(p.body, fn, delta, k + 1))
    if isinstance(p, Par):
        return Par(depth=depth, left=map_vars(p.left, fn, delta, k), right=map_vars(p.right, fn, delta, k))
    if isinstance(p, Recv):
        return Recv(
            depth=depth,
            chan=var(fn(k, p.chan.index), depth),
            hint=p.hint,
            body=map_vars(p.body, fn, delta, k + 1),
        )
    return Send(
        depth=depth,
        chan=var(fn(k, p.chan.index), depth),
        payload=var(fn(k, p.payload.index), depth),
        body=map_vars(p.body, fn, delta, k),
    )


def lift(i: Union[int, Var], p: Process) -> Process:
    index = index_of(i)
    if not 0 <= index <= p.depth:
        raise IndexOutOfRange(index, p.depth + 1)
    return map_vars(p, lambda k, v: v + 1 if v >= index + k else v, 1)


def unused(i: Union[int, Var], p: Process) -> bool:
    index = index_of(i)
    if not 0 <= index < p.depth:
        raise IndexOutOfRange(index, p.depth)

    def free_of(node: Process, target: int) -> bool:
        if isinstance(node, End):
            return True
        if isinstance(node, Res):
            return free_of(node.body, target + 1)
        if isinstance(node, Par):
            return free_of(node.left, target) and free_of(node.right, target)
        if isinstance(node, Recv):
            return node.chan.index != target and free_of(node.body, target + 1)
        return node.chan.index != target and node.payload.index != target and free_of(node.body, target)

    return free_of(p, index)


def lower(i: Union[int, Var], p: Process, witness: Optional[bool] = None) -> Process:
    index = index_of(i)
    if witness is False or not unused(index, p):
        raise UnusedViolation(f"Variable {index} is used, cannot lower")
    return map_vars(p, lambda k, v: v - 1 if v > index + k else v, -1)


def exchange(i: Union[int, Var], p: Process) -> Process:
    index = index_of(i)
    if index < 0 or index + 1 >= p.depth:
        raise IndexOutOfRange(index + 1, p.depth)

    def swap(k: int, v: int) -> int:
        if v == index + k:
            return v + 1
        if v == index + k + 1:
            return v - 1
        return v

    return map_vars(p, swap, 0)


def subst(p: Process, j: Union[int, Var], i: Union[int, Var]) -> Process:
    """Replace references to `i` by references to `j`."""
    target, source = index_of(j), index_of(i)
    for index in (target, source):
        if not 0 <= index < p.depth:
            raise IndexOutOfRange(index, p.depth)
    return map_vars(p, lambda k, v: target + k if v == source + k else v, 0)


def erase_hints(p: Process) -> Process:
    if isinstance(p, End):
        return p
    if isinstance(p, Res):
        return Res(depth=p.depth, annot=p.annot, body=erase_hints(p.body))
    if isinstance(p, Par):
        return Par(depth=p.depth, left=erase_hints(p.left), right=erase_hints(p.right))
    if isinstance(p, Recv):
        return Recv(depth=p.depth, chan=p.chan, body=erase_hints(p.body))
    return Send(depth=p.depth, chan=p.chan, payload=p.payload, body=erase_hints(p.body))
