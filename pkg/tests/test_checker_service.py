import pytest
from hypothesis import given, settings, strategies as st

from app.errors import (
    LeftoverPiError, MissingAnnotation, NotAChannel, PayloadTypeMismatch, ResidualUsage, ScopeDepthError,
    ScopeError, SplitUndefined,
)
from app.models.process import End
from app.models.program import SourceProgram
from app.models.semantics import Selector as S
from app.models.types import UsagePair
from app.services.checker_service import (
    CHILD_SELECTORS, check, check_program, consumption_of, derivation_subject, recheck, recheck_report, subderivation,
)
from app.services.generator_service import gen_well_typed
from app.services.parser_service import parse_process
from app.services.printer_service import show_ctx
from app.services.program_service import check_source

RECEIVER = (S.RES_BODY, S.PAR_RIGHT, S.RES_BODY, S.PAR_RIGHT, S.RES_BODY, S.PAR_LEFT)
CARRIER = RECEIVER[:-1] + (S.PAR_RIGHT,)
SENDER = (S.RES_BODY, S.PAR_LEFT, S.RES_BODY)


def gra(i, o):
    return UsagePair(alg="gra", input=i, output=o)


def test_courier_checks_with_empty_contexts(courier):
    assert courier.derivation.ctx_in == ()
    assert courier.derivation.ctx_out == ()
    assert recheck(courier.derivation)


def test_courier_receiver_takes_two_inputs(courier):
    node = subderivation(courier.derivation, RECEIVER)
    assert consumption_of(node) == (gra(2, 0), gra(0, 0), gra(0, 0))


def test_courier_carrier_forwards_what_it_receives(courier):
    node = subderivation(courier.derivation, CARRIER)
    assert consumption_of(node) == (gra(0, 2), gra(1, 0), gra(1, 0))


def test_courier_sender_uses_output_once(courier):
    node = subderivation(courier.derivation, SENDER)
    assert node.kind == "send"
    assert consumption_of(node) == (gra(0, 0), gra(0, 1))


def test_derivation_subject_gives_back_the_process(courier):
    assert derivation_subject(courier.derivation) == courier.process


def test_external_channel_leaves_its_unused_capability():
    checked = check_source(
        "free c : chan<unit>[gra (0,0)] @ gra (1,2); free u : unit @ gra (0,0);\n"
        "c?(x). end | c!u. end"
    )
    assert show_ctx(checked.derivation.ctx_out) == "[gra (0,1), gra (0,0)]"


@pytest.mark.parametrize(
    "source, error",
    [
        ("free u : unit; u!u. end", NotAChannel),
        (
            "free c : chan<unit>[lin (0,0)] @ lin (0,1); free u : unit @ lin (0,0); c!u. c!u. end",
            SplitUndefined,
        ),
        ("new c : chan<unit>[lin (0,0)] @ lin 1 . end", ResidualUsage),
        ("x!y. end", ScopeError),
        (
            "free c : chan<chan<unit>[lin (0,0)]>[lin (0,0)] @ lin (0,1); free u : unit; c!u. end",
            PayloadTypeMismatch,
        ),
    ],
)
def test_rejected_programs(source, error):
    with pytest.raises(error):
        check_source(source)


def test_errors_carry_the_failing_position():
    with pytest.raises(SplitUndefined) as info:
        check_source(
            "free c : chan<unit>[lin (0,0)] @ lin (0,1); free u : unit @ lin (0,0); end | c!u. c!u. end"
        )
    assert info.value.path == ("ParRight", "SendBody")
    assert info.value.detail()["path"] == ["ParRight", "SendBody"]


def test_check_requires_matching_depth():
    with pytest.raises(ScopeDepthError):
        check((), (), (), End(depth=1))


def replace_node(d, path, new):
    if not path:
        return new
    position = CHILD_SELECTORS[d.kind].index(path[0])
    children = list(d.children)
    children[position] = replace_node(children[position], path[1:], new)
    return d.model_copy(update={"children": tuple(children)})


def test_recheck_spots_a_tampered_node(courier):
    sender = subderivation(courier.derivation, SENDER)
    tampered = replace_node(courier.derivation, SENDER, sender.model_copy(update={"ctx_out": sender.ctx_in}))
    failure = recheck_report(tampered)
    assert failure is not None
    assert failure.path == ("ResBody", "ParLeft")
    assert not recheck(tampered)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_generated_derivations_recheck(seed):
    sample = gen_well_typed(seed, budget=8)
    derivation, leftover = check(sample.pre, sample.idxs, sample.ctx, sample.process)
    assert recheck(derivation)
    assert derivation.ctx_out == leftover


def test_leftover_pi_error_is_the_common_base():
    assert issubclass(SplitUndefined, LeftoverPiError)


def test_unannotated_restriction_is_rejected():
    program = SourceProgram(decls=(), body=parse_process("new c . end"))
    with pytest.raises(MissingAnnotation):
        check_program(program)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_checking_is_deterministic(seed):
    generated = gen_well_typed(seed, budget=6)
    first = check(generated.pre, generated.idxs, generated.ctx, generated.process)
    second = check(generated.pre, generated.idxs, generated.ctx, generated.process)
    assert first == second


def test_courier_checks_the_same_way_twice(courier_source):
    assert check_source(courier_source) == check_source(courier_source)
