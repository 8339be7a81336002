import pytest
from hypothesis import given, strategies as st

from app.errors import AlgebraError, AlgebraLawError, AlgebraMismatch, CtxSplitUndefined, UnknownAlgebra
from app.models.types import UsagePair
from app.services.algebra_service import (
    DEFAULT_ALGEBRAS, OMEGA, GradedAlgebra, LinearAlgebra, SharedAlgebra, both_pair, check_laws,
    check_split, consumption, in_pair, out_pair, parse_usage, require_split_ctx, show_usage, split_ctx,
    split_pair, zero_pair,
)


def gra(i, o):
    return UsagePair(alg="gra", input=i, output=o)


def lin(i, o):
    return UsagePair(alg="lin", input=i, output=o)


@pytest.mark.parametrize("alg", [LinearAlgebra(), SharedAlgebra()])
def test_finite_algebras_satisfy_every_law(alg):
    assert check_laws(alg) == []


def test_graded_algebra_satisfies_every_law_up_to_32():
    assert check_laws(GradedAlgebra(), range(33)) == []


def test_linear_split_table():
    alg = LinearAlgebra()
    assert alg.split(1, 1) == 0
    assert alg.split(1, 0) == 1
    assert alg.split(0, 0) == 0
    assert alg.split(0, 1) is None


def test_graded_split_subtracts():
    alg = GradedAlgebra()
    assert alg.split(5, 2) == 3
    assert alg.split(2, 5) is None
    assert check_split(alg, 4, 4, 0)


def test_shared_algebra_has_a_single_element():
    alg = SharedAlgebra()
    assert alg.zero == alg.one == OMEGA
    assert alg.split(OMEGA, OMEGA) == OMEGA


@given(st.integers(0, 50), st.integers(0, 50))
def test_graded_combine_inverts_split(y, z):
    alg = GradedAlgebra()
    assert alg.split(alg.combine(y, z), y) == z


def test_pair_constants():
    alg = LinearAlgebra()
    assert zero_pair(alg) == lin(0, 0)
    assert in_pair(alg) == lin(1, 0)
    assert out_pair(alg) == lin(0, 1)
    assert both_pair(alg) == lin(1, 1)


def test_split_pair_is_componentwise():
    alg = GradedAlgebra()
    assert split_pair(alg, gra(3, 2), gra(1, 2)) == gra(2, 0)
    assert split_pair(alg, gra(3, 2), gra(4, 0)) is None


def test_split_pair_rejects_foreign_pairs():
    with pytest.raises(AlgebraError):
        split_pair(GradedAlgebra(), lin(1, 0), lin(1, 0))


def test_split_ctx_and_consumption():
    gamma = (gra(2, 2), lin(1, 1))
    delta = (gra(1, 0), lin(1, 0))
    assert split_ctx(gamma, delta) == (gra(1, 2), lin(0, 1))
    assert consumption(gamma, (gra(1, 2), lin(0, 1))) == delta
    assert split_ctx(gamma, (gra(3, 0), lin(0, 0))) is None


def test_require_split_ctx_reports_position():
    with pytest.raises(CtxSplitUndefined) as info:
        require_split_ctx((gra(0, 0), gra(1, 1)), (gra(0, 0), gra(2, 0)))
    assert info.value.index == 1
    with pytest.raises(AlgebraMismatch):
        require_split_ctx((gra(0, 0),), (lin(0, 0),))


def test_resolve_unknown_algebra():
    with pytest.raises(UnknownAlgebra):
        DEFAULT_ALGEBRAS.resolve("aff")


class SaturatingAlgebra(GradedAlgebra):
    """Taking anything out of x leaves x."""

    name = "sat"

    def split(self, x, y):
        return x if y <= x else None


def test_register_rejects_lawless_algebra():
    with pytest.raises(AlgebraLawError):
        DEFAULT_ALGEBRAS.register("sat", SaturatingAlgebra(), range(4))


def test_register_returns_extended_set():
    class Graded2(GradedAlgebra):
        name = "gra2"

    extended = DEFAULT_ALGEBRAS.register("gra2", Graded2(), range(6))
    assert "gra2" in extended
    assert "gra2" not in DEFAULT_ALGEBRAS


def test_register_checks_the_name():
    with pytest.raises(AlgebraError):
        DEFAULT_ALGEBRAS.register("other", GradedAlgebra(), range(3))


def test_usage_literals():
    assert parse_usage(SharedAlgebra(), "w") == OMEGA
    assert parse_usage(GradedAlgebra(), "12") == 12
    assert show_usage(GradedAlgebra(), 12) == "12"
    with pytest.raises(AlgebraError):
        parse_usage(LinearAlgebra(), "w")


def test_split_pair_rejects_values_outside_the_algebra():
    with pytest.raises(AlgebraError):
        split_pair(GradedAlgebra(), gra("w", 0), gra(0, 0))
    with pytest.raises(AlgebraError):
        split_pair(LinearAlgebra(), lin(1, 1), lin(2, 0))


class LeakyCombine(GradedAlgebra):
    """Combines to a value from which the parts cannot be taken back out."""

    name = "leaky"

    def combine(self, y, z):
        return abs(y - z)


def test_undefined_split_must_not_have_a_combination():
    violations = check_laws(LeakyCombine(), range(4))
    assert [v for v in violations if v.law != "computeʳ"] == []
    assert any(v.witness == (1, 2) for v in violations)
