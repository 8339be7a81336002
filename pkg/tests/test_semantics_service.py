from collections import Counter

import pytest
from hypothesis import assume, given, settings, strategies as st

from app.errors import PathError, RewriteError, ShapeMismatch, UnusedViolation
from app.models.process import End, Par, Recv, Res, Send
from app.models.semantics import INTERNAL, CongRule, CongStep, Direction, Selector as S, external
from app.models.types import NuAnnot, UnitType, UsagePair
from app.services.generator_service import gen_well_typed
from app.services.printer_service import show_process
from app.services.program_service import check_source
from app.services.scope_service import var
from app.services.semantics_service import (
    applicable_rewrites, apply_cong, apply_step, comm, flatten_normalize, flatten_steps, normalize_to_end,
    prenex_steps, process_eq, reductions, spend_annotation, spine, subterm, trace,
)

ONE_COMM_EXTERNAL = (
    "free c : chan<unit>[lin (0,0)] @ lin (1,1); free u : unit;\n"
    "c?(x). end | c!u. end"
)
ONE_COMM_INTERNAL = (
    "free u : unit;\n"
    "new c : chan<unit>[lin (0,0)] @ lin 1 . (c?(x). end | c!u. end)"
)


def send(i, j, depth, body=None):
    return Send(depth=depth, chan=var(i, depth), payload=var(j, depth), body=body or End(depth=depth))


def annot(mult, alg="gra"):
    return NuAnnot(
        payload_type=UnitType(), payload_usage=UsagePair(alg="lin", input=0, output=0),
        chan_alg=alg, chan_mult=mult,
    )


def test_comp_assoc_both_ways():
    p = Par(depth=1, left=send(0, 0, 1), right=Par(depth=1, left=End(depth=1), right=send(0, 0, 1)))
    q = apply_cong(CongRule.COMP_ASSOC, (), p)
    assert isinstance(q.left, Par)
    assert apply_cong(CongRule.COMP_ASSOC, (), q, Direction.BACKWARD) == p


def test_comp_id_and_scope_end():
    p = Par(depth=0, left=End(depth=0), right=End(depth=0))
    assert apply_cong(CongRule.COMP_ID, (), p) == End(depth=0)
    wrapped = apply_cong(CongRule.SCOPE_END, (), End(depth=0), Direction.BACKWARD, hint="k")
    assert show_process(wrapped) == "new[k]{chan<unit>[lin (0,0)] @ lin 0}. end"
    assert apply_cong(CongRule.SCOPE_END, (), wrapped) == End(depth=0)


def test_scope_ext_moves_unrelated_component_out():
    p = Res(depth=1, hint="c", annot=annot(0), body=Par(depth=2, left=End(depth=2), right=send(1, 1, 2)))
    q = apply_cong(CongRule.SCOPE_EXT, (), p)
    assert show_process(q) == "new[c]{chan<unit>[lin (0,0)] @ gra 0}. end | 0!0. end"
    assert apply_cong(CongRule.SCOPE_EXT, (), q, Direction.BACKWARD) == p


def test_scope_ext_refuses_to_expose_the_channel():
    p = Res(depth=1, hint="c", annot=annot(0), body=Par(depth=2, left=End(depth=2), right=send(0, 1, 2)))
    with pytest.raises(UnusedViolation):
        apply_cong(CongRule.SCOPE_EXT, (), p)


def test_scope_comm_exchanges_binders():
    p = Res(depth=0, hint="a", annot=annot(1), body=Res(depth=1, hint="b", annot=annot(2), body=send(0, 1, 2)))
    q = apply_cong(CongRule.SCOPE_COMM, (), p)
    assert q.hint == "b" and q.body.hint == "a"
    assert show_process(q.body.body) == "1!0. end"
    assert apply_cong(CongRule.SCOPE_COMM, (), q) == p


def test_rewrites_reject_wrong_shapes():
    with pytest.raises(ShapeMismatch):
        apply_cong(CongRule.COMP_SYM, (), End(depth=0))
    with pytest.raises(PathError):
        apply_cong(CongRule.COMP_SYM, (S.PAR_LEFT,), End(depth=0))
    assert issubclass(ShapeMismatch, RewriteError)


def test_rewrite_at_nested_path():
    inner = Par(depth=1, left=End(depth=1), right=send(0, 0, 1))
    p = Res(depth=0, hint="c", annot=annot(1), body=inner)
    q = apply_step(CongStep(rule=CongRule.COMP_SYM, path=(S.RES_BODY,)), p)
    assert subterm(q, (S.RES_BODY, S.PAR_LEFT)) == send(0, 0, 1)


def test_flatten_drops_end_components():
    p = Par(depth=1, left=Par(depth=1, left=send(0, 0, 1), right=End(depth=1)), right=send(0, 0, 1))
    assert spine(flatten_normalize(p)) == [send(0, 0, 1), send(0, 0, 1)]


def test_comm_substitutes_the_payload():
    recv = Recv(depth=2, chan=var(1, 2), hint="x", body=send(0, 0, 3))
    redex = Par(depth=2, left=recv, right=send(1, 0, 2))
    assert show_process(comm(redex)) == "0!0. end | end"
    with pytest.raises(ShapeMismatch):
        comm(Par(depth=2, left=send(1, 0, 2), right=recv))


def test_spend_annotation():
    assert spend_annotation(annot(2)).chan_mult == 1
    assert spend_annotation(annot(0, "lin")).chan_mult == 0
    assert spend_annotation(None) is None


def test_one_external_communication():
    process = check_source(ONE_COMM_EXTERNAL).process
    (step,) = reductions(process)
    assert step.channel == external(1)
    assert step.process == Par(depth=2, left=End(depth=2), right=End(depth=2))


def test_one_internal_communication_spends_the_restriction():
    process = check_source(ONE_COMM_INTERNAL).process
    (step,) = reductions(process)
    assert step.channel == INTERNAL
    assert show_process(step.process) == "new[c]{chan<unit>[lin (0,0)] @ lin 0}. (end | end)"


def test_courier_runs_to_completion(courier):
    entries = trace(courier.process, to_end=True)
    assert len(entries) == 4
    assert all(entry.channel == INTERNAL for entry in entries)
    assert [entry.step for entry in entries] == [1, 2, 3, 4]
    assert reductions(entries[-1].process) == []
    final, _ = normalize_to_end(entries[-1].process)
    assert final == End(depth=0)


def test_trace_stops_after_requested_steps(courier):
    assert len(trace(courier.process, steps=2)) == 2
    assert trace(courier.process, steps=0) == []


def test_process_eq_ignores_hints():
    a = Res(depth=0, hint="a", annot=annot(0), body=End(depth=1))
    b = Res(depth=0, hint="b", annot=annot(0), body=End(depth=1))
    assert process_eq(a, b)
    assert a != b


def test_applicable_rewrites_skip_rules_that_always_apply():
    p = Par(depth=1, left=send(0, 0, 1), right=End(depth=1))
    offered = applicable_rewrites(p)
    assert CongStep(rule=CongRule.COMP_ID, path=()) in offered
    assert CongStep(rule=CongRule.COMP_SYM, path=()) in offered
    assert all(step.direction == Direction.FORWARD or step.rule != CongRule.COMP_ID for step in offered)
    assert all(step.rule != CongRule.SCOPE_END for step in offered)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_prenex_rewrites_replay_to_the_same_process(seed):
    p = gen_well_typed(seed, budget=8).process
    normal, steps = normalize_to_end(p)
    replayed = p
    for step in steps:
        replayed = apply_step(step, replayed)
    assert replayed == normal


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_reduction_rewrites_replay(seed):
    p = gen_well_typed(seed, budget=8).process
    for step in reductions(p):
        replayed = p
        for rewrite in step.rewrites:
            replayed = apply_step(rewrite, replayed)
        assert isinstance(subterm(replayed, step.redex), Par)


def test_recorded_normalisation_steps():
    p = Par(depth=1, left=Par(depth=1, left=send(0, 0, 1), right=End(depth=1)), right=send(0, 0, 1))
    assert flatten_steps(p) == [CongStep(rule=CongRule.COMP_ID, path=(S.PAR_LEFT,))]
    idle = Par(depth=0, left=Res(depth=0, hint="c", annot=annot(0), body=End(depth=1)), right=End(depth=0))
    assert prenex_steps(idle) == [
        CongStep(rule=CongRule.COMP_ID, path=()),
        CongStep(rule=CongRule.SCOPE_END, path=()),
    ]
    assert normalize_to_end(idle)[0] == End(depth=0)


def dec(channel):
    if channel.kind == "internal":
        return channel
    return INTERNAL if channel.index == 0 else external(channel.index - 1)


def direct_steps(p):
    """Steps derived by the communication, parallel and restriction rules alone."""
    found = []
    if isinstance(p, Par):
        if isinstance(p.left, Recv) and isinstance(p.right, Send) and p.left.chan == p.right.chan:
            found.append((external(p.left.chan.index), comm(p)))
        for channel, q in direct_steps(p.left):
            found.append((channel, Par(depth=p.depth, left=q, right=p.right)))
    elif isinstance(p, Res):
        for channel, q in direct_steps(p.body):
            annot = spend_annotation(p.annot) if dec(channel) == INTERNAL and channel != INTERNAL else p.annot
            found.append((dec(channel), Res(depth=p.depth, hint=p.hint, annot=annot, body=q)))
    return found


def steps_within_two_rewrites(p):
    reachable = [p]
    frontier = [p]
    for _ in range(2):
        frontier = [apply_step(step, q) for q in frontier for step in applicable_rewrites(q)]
        reachable.extend(frontier)
    return [found for q in reachable for found in direct_steps(q)]


def assert_derivable(p):
    oracle = None
    for step in reductions(p):
        if len(step.rewrites) > 2:
            continue
        oracle = oracle if oracle is not None else steps_within_two_rewrites(p)
        assert any(c == step.channel and process_eq(q, step.process) for c, q in oracle), step


@pytest.mark.parametrize("source", [ONE_COMM_EXTERNAL, ONE_COMM_INTERNAL])
def test_reductions_follow_the_rules(source):
    p = check_source(source).process
    assert reductions(p)
    assert_derivable(p)


def test_reduction_behind_a_swap_follows_the_rules():
    p = Par(
        depth=2,
        left=send(1, 0, 2),
        right=Recv(depth=2, chan=var(1, 2), hint="x", body=End(depth=3)),
    )
    (step,) = reductions(p)
    assert len(step.rewrites) == 1
    assert_derivable(p)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_generated_reductions_follow_the_rules(seed):
    assert_derivable(gen_well_typed(seed, budget=4).process)


def test_restriction_decrements_channels():
    inner = Par(depth=2, left=Recv(depth=2, chan=var(1, 2), hint="x", body=End(depth=3)), right=send(1, 0, 2))
    assert [s.channel for s in reductions(inner)] == [external(1)]
    outer = Res(depth=1, hint="c", annot=annot(3), body=inner)
    assert [s.channel for s in reductions(outer)] == [external(0)]
    closed = Res(depth=0, hint="d", annot=annot(3), body=outer)
    (step,) = reductions(closed)
    assert step.channel == INTERNAL
    assert step.process.annot.chan_mult == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_restriction_maps_every_channel_through_dec(seed):
    p = gen_well_typed(seed, budget=6).process
    assume(p.depth > 0)
    wrapped = Res(depth=p.depth - 1, hint="c", annot=annot(8), body=p)
    expected = Counter(dec(step.channel) for step in reductions(p))
    found = Counter(step.channel for step in reductions(wrapped))
    assert not expected - found
