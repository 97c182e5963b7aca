import json

import pytest

from mangrove.cond import bamboo
from mangrove.errors import TermFormatError
from mangrove.kord import OMEGA, fmt, omega_pow
from mangrove.order import leq
from mangrove.sim import (
    Custom,
    EnsureEmu,
    EnsureLambda,
    EnsureS,
    Mark,
    Run,
    check_run,
    emu_witness,
    extend,
    goal_from_doc,
    limit_fragment,
    load_script,
    run,
    run_boundaries,
)
from mangrove.verify import check_fragment

W = OMEGA


@pytest.fixture(scope="module")
def three_goal_run():
    first = run([EnsureS([W * 5]), EnsureLambda(omega_pow(W) * 3)], budget=100)
    return extend(first, [EnsureEmu(first.final.lam)], budget=100)


def test_three_goal_run(three_goal_run):
    r = three_goal_run
    assert [type(s.goal).__name__ for s in r.steps] == ["Mark", "EnsureS", "EnsureLambda", "EnsureEmu"]
    for step in r.steps[1:]:
        assert step.certificate["leq_previous"]["status"] == "Proven"
        assert step.certificate["goal_met"] is True
    assert r.final.in_s(W * 5)
    assert r.final.lam >= omega_pow(W) * 3
    assert emu_witness(r.final, r.steps[2].condition.lam) is not None
    assert check_run(r) == []


def test_run_is_transitively_descending(three_goal_run):
    conds = three_goal_run.conditions
    for i in range(len(conds)):
        for j in range(i + 1, len(conds)):
            assert leq(conds[j], conds[i]).proven


def test_empty_script_is_a_single_step():
    r = run([])
    assert len(r.steps) == 1 and r.final == bamboo()


def test_run_file_round_trip(three_goal_run):
    text = three_goal_run.dumps()
    again = Run.loads(text)
    assert again.dumps() == text
    doc = json.loads(text)
    assert doc["seed"] == 0 and doc["budget"] == 100


def test_run_file_rejects_extra_fields(three_goal_run):
    doc = three_goal_run.to_doc()
    doc["extra"] = 1
    with pytest.raises(TermFormatError):
        Run.from_doc(doc)


def test_limit_fragment(three_goal_run):
    frag = limit_fragment(three_goal_run)
    assert check_fragment(frag).ok
    levels = {n.level for n in frag.nodes}
    for beta in run_boundaries(three_goal_run):
        assert beta in levels
        assert three_goal_run.final.mangal_status(beta).proven


def test_goal_documents():
    goals = [EnsureS([W, W * 3]), EnsureLambda(omega_pow(W * 2)), EnsureEmu(), EnsureEmu(W),
             Custom("add_block", W * 4), Mark("note", "x")]
    for g in goals:
        assert goal_from_doc(g.to_doc()) == g
    text = json.dumps([g.to_doc() for g in goals])
    assert load_script(text) == goals


@pytest.mark.parametrize("text", ['{"kind": "ensure_s"}', '[{"kind": "nope"}]',
                                  '[{"kind": "ensure_lambda"}]', "not json",
                                  '[{"kind": "custom", "op": "splice", "arg": "0"}]'])
def test_bad_scripts(text):
    with pytest.raises(TermFormatError):
        load_script(text)


def test_met_goal_repeats_the_condition():
    r = run([EnsureS([0]), EnsureLambda(1)], budget=50)
    assert r.conditions[1] == r.conditions[0] == r.conditions[2]
    assert r.steps[2].certificate["already"] is True


def test_custom_steps():
    r = run([Custom("tower_ext", 2), Custom("add_block", W * 6)], budget=50)
    assert r.final.in_s(W * 6)
    assert fmt(r.conditions[1].lam) == "w^(w)*3"
    assert check_run(r) == []


def test_universal_mode_needs_aprime():
    with pytest.raises(ValueError):
        run([], mode="universal")
