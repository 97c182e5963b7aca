import json

import pytest

from mangrove.cond import Node, add_block, bamboo, tower_ext
from mangrove.kord import KAPPA, OMEGA, ZERO, omega_pow
from mangrove.verify import (
    AXIOMS,
    Fragment,
    MutantCondition,
    check_condition,
    check_fragment,
    extract_fragment,
    fragment_to_dot,
    mutation_corpus,
)
from oracles import corpus

W = OMEGA
BAMBOO_LEVELS = [ZERO, W, omega_pow(2), omega_pow(W), KAPPA]


def test_bamboo_passes():
    rep = check_condition(bamboo(), budget=1500, seed=1)
    assert rep.ok, rep.failed()
    # no bamboo node has a limit order, so M6 and M7 have no instances
    assert all(rep.records[a].checked > 0 for a in AXIOMS if a not in ("M6", "M7"))


def test_towered_block_passes():
    p = tower_ext(add_block(bamboo(), W * 7), W)
    rep = check_condition(p, budget=600, seed=2)
    assert rep.ok, rep.failed()
    assert all(rep.records[a].checked > 0 for a in AXIOMS)


@pytest.mark.parametrize("index", range(0, 60, 6))
def test_corpus_sample_passes(index):
    rep = check_condition(corpus()[index], budget=250, seed=index)
    assert rep.ok, rep.to_doc()


@pytest.mark.parametrize("axiom,mutant", mutation_corpus(), ids=[a for a, _ in mutation_corpus()])
def test_each_mutation_is_caught_by_its_checker(axiom, mutant):
    rep = check_condition(mutant, budget=600, seed=0)
    assert not rep.records[axiom].ok
    assert rep.records[axiom].failures[0]["witness"] is not None


def test_mutation_corpus_covers_every_axiom():
    assert sorted(a for a, _ in mutation_corpus()) == sorted(AXIOMS)


def test_injected_width_mismatch_on_a_splice():
    p = next(c for c in corpus() if c.kind == "splice")
    level = p.segments[-1].start + omega_pow(2)
    mutant = MutantCondition(p, "wider level", theta_hook=lambda a: p.theta(a) + 1 if a == level else NotImplemented,
                             focus=[Node(level, ZERO)])
    assert not check_condition(mutant, budget=400).ok


def test_report_document_is_stable():
    a = check_condition(bamboo(), budget=100, seed=3).dumps()
    b = check_condition(bamboo(), budget=100, seed=3).dumps()
    assert a == b
    doc = json.loads(a)
    assert doc["seed"] == 3 and doc["budget"] == 100 and doc["ok"] is True


def test_bamboo_fragment_is_five_constant_chains():
    frag = extract_fragment(bamboo(), BAMBOO_LEVELS, W)
    assert {n.level for n in frag.nodes} == set(BAMBOO_LEVELS)
    for x, y in frag.edges:
        assert x.order == y.order
    assert check_fragment(frag).ok


def test_empty_and_single_node_fragments():
    assert extract_fragment(bamboo(), [], W).nodes == []
    one = extract_fragment(bamboo(), [ZERO], W)
    assert len(one.nodes) == 1
    assert check_fragment(one).ok


def test_deleting_an_edge_is_detected():
    frag = extract_fragment(bamboo(), BAMBOO_LEVELS, W)
    x, y = next(e for e in frag.edges if e[0].level == W and e[1].level == omega_pow(2))
    rep = check_fragment(frag.without_edge(x, y))
    assert not rep.ok
    assert set(rep.failed()) & {"tree_order", "M2"}


def test_fragment_document_round_trip():
    p = tower_ext(add_block(bamboo(), W * 7), 1)
    frag = extract_fragment(p, [ZERO, W, p.segments[-1].start, p.lam, KAPPA], W * 2)
    again = Fragment.loads(frag.dumps())
    assert again.dumps() == frag.dumps()
    assert check_fragment(again).ok


def test_dot_export_of_bamboo_is_vertical_chains():
    dot = fragment_to_dot(extract_fragment(bamboo(), BAMBOO_LEVELS, W))
    assert dot.startswith("digraph fragment {")
    edges = [line for line in dot.splitlines() if "->" in line]
    sources = [e.split("->")[0].strip() for e in edges]
    targets = [e.split("->")[1].strip(" ;") for e in edges]
    assert len(set(sources)) == len(sources)
    assert len(set(targets)) == len(targets)
