import logging

from hypothesis import given, settings, strategies as st

from app.models.process import End, Par, Process, Recv, Res, Send
from app.services.checker_service import check
from app.services.generator_service import MAX_FREE_CHANNELS, ProcessGenerator, gen_well_typed


def node_kinds(p: Process, found=None):
    found = set() if found is None else found
    found.add(p.kind)
    if isinstance(p, Par):
        node_kinds(p.left, found)
        node_kinds(p.right, found)
    elif isinstance(p, (Res, Recv, Send)):
        node_kinds(p.body, found)
    return found


def test_zero_budget_gives_end():
    sample = gen_well_typed(5, budget=0)
    assert sample.process == End(depth=len(sample.pre))


def test_same_seed_same_process():
    assert gen_well_typed(42, budget=8) == gen_well_typed(42, budget=8)


def test_root_scope_has_a_unit_per_algebra():
    scope = ProcessGenerator(1, ["lin", "gra"]).root_scope()
    assert scope.depth <= 2 + MAX_FREE_CHANNELS
    assert scope.idxs[-2:] == ("gra", "lin")


def test_unknown_algebras_are_left_out_of_the_mix():
    generator = ProcessGenerator(1, ["aff", "sha"])
    assert generator.mix == ["sha"]


def test_generated_processes_always_check(caplog):
    with caplog.at_level(logging.WARNING, logger="app.services.generator_service"):
        for seed in range(200):
            sample = gen_well_typed(seed, budget=8)
            check(sample.pre, sample.idxs, sample.ctx, sample.process)
    assert not [r for r in caplog.records if "does not check" in r.getMessage()]


def test_every_node_kind_shows_up():
    seen = set()
    for seed in range(100):
        node_kinds(gen_well_typed(seed, budget=8).process, seen)
    assert seen == {"end", "res", "par", "recv", "send"}


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.sampled_from([("lin",), ("gra",), ("sha",), ("lin", "sha")]))
def test_single_algebra_mixes_check(seed, mix):
    sample = gen_well_typed(seed, budget=6, mix=mix)
    assert set(sample.idxs) <= set(mix)
    check(sample.pre, sample.idxs, sample.ctx, sample.process)
