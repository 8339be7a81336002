import logging
from typing import Sequence, Tuple, TypeVar, Union

from app.errors import AlgebraMismatch, IndexOutOfRange, SplitUndefined
from app.models.process import Var
from app.models.types import Ctx, Idxs, PreCtx, Scope, Type, UsagePair
from app.services.algebra_service import DEFAULT_ALGEBRAS, AlgebraSet, split_pair, zero_pair

logger = logging.getLogger(__name__)

T = TypeVar("T")


def index_of(i: Union[int, Var]) -> int:
    return i.index if isinstance(i, Var) else i


# List surgery shared by contexts and derivation transformers

def insert_at(seq: Sequence[T], i: int, item: T) -> Tuple[T, ...]:
    if not 0 <= i <= len(seq):
        raise IndexOutOfRange(i, len(seq))
    return tuple(seq[:i]) + (item,) + tuple(seq[i:])


def delete_at(seq: Sequence[T], i: int) -> Tuple[T, ...]:
    if not 0 <= i < len(seq):
        raise IndexOutOfRange(i, len(seq))
    return tuple(seq[:i]) + tuple(seq[i + 1:])


def swap_at(seq: Sequence[T], i: int) -> Tuple[T, ...]:
    if i < 0 or i + 1 >= len(seq):
        raise IndexOutOfRange(i + 1, len(seq))
    items = list(seq)
    items[i], items[i + 1] = items[i + 1], items[i]
    return tuple(items)


def replace_at(seq: Sequence[T], i: int, item: T) -> Tuple[T, ...]:
    if not 0 <= i < len(seq):
        raise IndexOutOfRange(i, len(seq))
    return tuple(seq[:i]) + (item,) + tuple(seq[i + 1:])


def consume_var(
    pre: PreCtx,
    idxs: Idxs,
    ctx: Ctx,
    i: Union[int, Var],
    demanded: UsagePair,
    algebras: AlgebraSet = DEFAULT_ALGEBRAS,
) -> Tuple[Type, Ctx]:
    """Take `demanded` from position `i`, returning the type housed there and the leftover."""
    index = index_of(i)
    if not 0 <= index < len(ctx) or len(pre) != len(ctx) or len(idxs) != len(ctx):
        raise IndexOutOfRange(index, len(ctx))
    if demanded.alg != idxs[index]:
        raise AlgebraMismatch(index, idxs[index], demanded.alg)
    have = ctx[index]
    left = split_pair(algebras.resolve(idxs[index]), have, demanded)
    if left is None:
        raise SplitUndefined(index, have, demanded)
    return pre[index], replace_at(ctx, index, left)


def ctx_insert(scope: Scope, i: int, t: Type, x: UsagePair) -> Scope:
    return Scope(
        pre=insert_at(scope.pre, i, t),
        idxs=insert_at(scope.idxs, i, x.alg),
        ctx=insert_at(scope.ctx, i, x),
    )


def ctx_delete(scope: Scope, i: int) -> Scope:
    return Scope(
        pre=delete_at(scope.pre, i),
        idxs=delete_at(scope.idxs, i),
        ctx=delete_at(scope.ctx, i),
    )


def ctx_exchange(scope: Scope, i: int) -> Scope:
    return Scope(
        pre=swap_at(scope.pre, i),
        idxs=swap_at(scope.idxs, i),
        ctx=swap_at(scope.ctx, i),
    )


def zero_ctx(idxs: Idxs, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Ctx:
    return tuple(zero_pair(algebras.resolve(idx)) for idx in idxs)


def extend(scope: Scope, t: Type, x: UsagePair) -> Scope:
    """Bind a new variable at index 0."""
    return ctx_insert(scope, 0, t, x)
