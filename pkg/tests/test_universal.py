import pytest

from mangrove.cond import Node, add_block, bamboo, replace_s, tower_ext
from mangrove.errors import NotRelated, PullbackMismatch, TermFormatError
from mangrove.kord import KAPPA, OMEGA, ZERO, Ord, omega_pow
from mangrove.morcode import kappa_position, theta_position, tree_position
from mangrove.sim import EnsureEmu, EnsureLambda, EnsureS, limit_fragment, run
from mangrove.universal import (
    APrime,
    add_block_u,
    amalgam_u,
    check_universal,
    chi,
    decorate_fragment,
    f_pullback,
    pullback,
    tower_ext_u,
)
from mangrove.verify import check_fragment, extract_fragment
from oracles import augmented_law_failures

W = OMEGA
A = APrime([0, W])


@pytest.fixture(scope="module")
def pair():
    p2 = add_block(bamboo(), W * 5)
    return p2, replace_s(p2, [0, W * 9])


def test_aprime_file_round_trip():
    a = APrime([W, 0, W])
    assert a.members == (ZERO, W)
    assert APrime.loads(a.dumps()) == a
    assert a.support_in(1, W * 2) == [W]
    with pytest.raises(TermFormatError):
        APrime.loads("w\n0\n")


def test_chi_examples():
    b = bamboo()
    assert chi(b, APrime([0]), 1) == 1
    assert chi(b, APrime([0]), 2) == 0
    assert chi(b, A, 0) == 1
    assert chi(b, A, W * (KAPPA * omega_pow(W))) == 0
    assert chi(b, A, W + 3) == 0
    assert chi(b, A, theta_position(omega_pow(W) + 1, 0)) is None


def test_pullback_examples():
    b = bamboo()
    x = Node(omega_pow(W), 3)
    # position 0 carries code bit 1 and position 1 carries membership of 0
    assert pullback(b, APrime([0]), x, 3) == (ZERO, Ord(1))
    assert pullback(b, APrime([5]), Node(W, 0), 0) == ()
    with pytest.raises(NotRelated):
        pullback(b, A, Node(W, 0), 1)


def test_pullback_is_empty_when_nothing_is_coded():
    p = add_block(bamboo(), W * 5)
    x = Node(p.lam, ZERO)
    assert pullback(p, APrime([]), x, ZERO) == ()


def test_check_universal_examples(pair):
    assert check_universal(bamboo(), A, 100).ok
    short = replace_s(tower_ext(pair[0], 1), [0])
    assert check_universal(short, A, 100).failed() == ["kappa_coverage"]
    outside = add_block(bamboo(), tree_position(omega_pow(omega_pow(W)), 0))
    assert check_universal(outside, A, 100).failed() == ["S_in_code_domain"]


def test_add_block_u_clause_one_is_plain():
    sigma = theta_position(W, 1)
    q = add_block_u(bamboo(), sigma, A)
    assert q.kind == "add_block" and q.args[0] == bamboo()
    assert check_universal(q, A, 100).ok


def test_add_block_u_adds_the_referenced_block_first():
    sigma = kappa_position(W * 3, 0, 0)
    q = add_block_u(bamboo(), sigma, A)
    assert q.in_s(W * 3) and q.in_s(sigma)
    assert check_universal(q, A, 100).ok


def test_add_block_u_with_referenced_block_present():
    p = add_block_u(bamboo(), W * 3, A)
    sigma = kappa_position(W * 3, 1, 0)
    q = add_block_u(p, sigma, A)
    assert q.blocks == p.blocks + (sigma,)
    assert check_universal(q, A, 100).ok


def test_tower_ext_u_is_universal():
    assert check_universal(tower_ext_u(bamboo(), 1, A), A, 100).ok


def test_amalgam_u(pair):
    p2, q2 = pair
    assert f_pullback(p2, A) == f_pullback(q2, A)
    assert check_universal(amalgam_u(p2, q2, A), A, 100).ok
    with pytest.raises(PullbackMismatch):
        amalgam_u(p2, q2, APrime([W * 5]))


def test_universal_run_and_decorated_fragment():
    script = [EnsureS([W * 3]), EnsureLambda(omega_pow(W * 3)), EnsureEmu(),
              EnsureS([W * 8]), EnsureLambda(omega_pow(W * 5))]
    r = run(script, "universal", A, budget=100)
    assert len(r.steps) == 6
    for c in r.conditions:
        assert check_universal(c, A, 100).ok
    frag = limit_fragment(r)
    assert frag.a_sets
    assert check_fragment(frag).ok
    assert augmented_law_failures(frag) == []


def test_decorated_bamboo_fragment():
    b = bamboo()
    frag = extract_fragment(b, [ZERO, W, omega_pow(W), KAPPA], W * 2, per_block=4)
    dec = decorate_fragment(frag, b, A)
    assert augmented_law_failures(dec) == []
    assert check_fragment(dec).ok
