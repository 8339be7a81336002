from itertools import product

import pytest
from hypothesis import given, strategies as st

from app.errors import AlgebraMismatch, IndexOutOfRange, SplitUndefined
from app.models.types import ChanType, Scope, UnitType, UsagePair
from app.services.algebra_service import GradedAlgebra, LinearAlgebra, both_pair, in_pair, out_pair
from app.services.context_service import (
    consume_var, ctx_delete, ctx_exchange, ctx_insert, extend, zero_ctx,
)
from app.services.printer_service import show_ctx

LIN = LinearAlgebra()
GRA = GradedAlgebra()


@pytest.fixture
def scope():
    pre = (UnitType(), ChanType(payload=UnitType(), usage=in_pair(LIN)))
    return Scope(pre=pre, idxs=("lin", "lin"), ctx=(both_pair(LIN), both_pair(LIN)))


def test_consume_takes_input_capability(scope):
    t, leftover = consume_var(scope.pre, scope.idxs, scope.ctx, 1, in_pair(LIN))
    assert t == scope.pre[1]
    assert show_ctx(leftover) == "[lin (0,1), lin (1,1)]"


def test_consume_twice_fails_on_linear_input(scope):
    _, leftover = consume_var(scope.pre, scope.idxs, scope.ctx, 1, in_pair(LIN))
    with pytest.raises(SplitUndefined) as info:
        consume_var(scope.pre, scope.idxs, leftover, 1, in_pair(LIN))
    assert info.value.index == 1


def test_consume_checks_index_and_algebra(scope):
    with pytest.raises(IndexOutOfRange):
        consume_var(scope.pre, scope.idxs, scope.ctx, 2, in_pair(LIN))
    with pytest.raises(AlgebraMismatch):
        consume_var(scope.pre, scope.idxs, scope.ctx, 0, UsagePair(alg="gra", input=1, output=0))


def test_zero_demand_leaves_context_alone(scope):
    _, leftover = consume_var(scope.pre, scope.idxs, scope.ctx, 0, UsagePair(alg="lin", input=0, output=0))
    assert leftover == scope.ctx


def test_insert_delete_and_exchange(scope):
    grown = ctx_insert(scope, 1, UnitType(), out_pair(LIN))
    assert grown.depth == 3
    assert grown.ctx[1] == out_pair(LIN)
    assert ctx_delete(grown, 1) == scope
    swapped = ctx_exchange(scope, 0)
    assert swapped.pre == (scope.pre[1], scope.pre[0])
    assert ctx_exchange(swapped, 0) == scope
    with pytest.raises(IndexOutOfRange):
        ctx_exchange(scope, 1)


def test_extend_binds_index_zero(scope):
    bigger = extend(scope, UnitType(), UsagePair(alg="sha", input="w", output="w"))
    assert bigger.idxs == ("sha", "lin", "lin")


def test_scope_rejects_misaligned_contexts():
    with pytest.raises(ValueError):
        Scope(pre=(UnitType(),), idxs=("lin",), ctx=())
    with pytest.raises(ValueError):
        Scope(pre=(UnitType(),), idxs=("lin",), ctx=(UsagePair(alg="gra", input=0, output=0),))


def test_zero_ctx():
    assert show_ctx(zero_ctx(("lin", "sha"))) == "[sha (w,w), lin (0,0)]"


def consume_or_none(scope, ctx, demanded):
    if ctx is None:
        return None
    try:
        return consume_var(scope.pre, scope.idxs, ctx, 0, demanded)[1]
    except SplitUndefined:
        return None


def combined(alg, y, z):
    first, second = alg.combine(y.input, z.input), alg.combine(y.output, z.output)
    if first is None or second is None:
        return None
    return UsagePair(alg=alg.name, input=first, output=second)


def assert_composable(scope, y, z, alg):
    twice = consume_or_none(scope, consume_or_none(scope, scope.ctx, y), z)
    w = combined(alg, y, z)
    once = consume_or_none(scope, scope.ctx, w) if w is not None else None
    assert twice == once


LIN_PAIRS = [UsagePair(alg="lin", input=i, output=o) for i, o in product([0, 1], repeat=2)]


@pytest.mark.parametrize("have", LIN_PAIRS)
def test_consuming_twice_is_consuming_the_combination_on_lin(have):
    single = Scope(pre=(UnitType(),), idxs=("lin",), ctx=(have,))
    for y, z in product(LIN_PAIRS, repeat=2):
        assert_composable(single, y, z, LIN)


counts = st.integers(min_value=0, max_value=6)


@given(counts, counts, counts, counts, counts, counts)
def test_consuming_twice_is_consuming_the_combination_on_gra(hi, ho, yi, yo, zi, zo):
    single = Scope(pre=(UnitType(),), idxs=("gra",), ctx=(UsagePair(alg="gra", input=hi, output=ho),))
    y = UsagePair(alg="gra", input=yi, output=yo)
    z = UsagePair(alg="gra", input=zi, output=zo)
    assert_composable(single, y, z, GRA)
