"""End-to-end acceptance checks, one test per criterion.

The conftest hook prints a PASS/FAIL line for each of them after the run.
"""

import json
import random
import subprocess
import sys
import time

import pytest

from mangrove.cond import add_block, amalgam, bamboo, replace_s
from mangrove.errors import PullbackMismatch
from mangrove.homog import AutoMap, patch
from mangrove.kord import KAPPA, OMEGA, Ord, left_sub, omega_pow, random_ord
from mangrove.morcode import (
    Skeleton,
    code_at,
    decode_window,
    iota,
    theta_position,
)
from mangrove.order import leq, leq_transitive_check
from mangrove.sim import EnsureEmu, EnsureLambda, EnsureS, limit_fragment, run
from mangrove.universal import APrime, amalgam_u, check_universal, f_pullback
from mangrove.verify import check_condition, check_fragment, extract_fragment, mutation_corpus
from oracles import (
    augmented_law_failures,
    brute_iota_in_segment,
    constructor_steps,
    corpus,
    decoded_matches,
    determined_levels,
    extensions_above,
    patch_scenarios,
    query_disagreements,
    reconstruction_round_trip,
    sample_positions,
    segment_prefixes,
    swap_setup,
    window_for,
)

W = OMEGA


def test_criterion_01_ordinal_kernel(record_property):
    start = time.perf_counter()
    small = [Ord(n) for n in range(1000)]
    for a, oa in enumerate(small):
        for b, ob in enumerate(small):
            assert oa + ob == Ord(a + b)
            assert oa * ob == Ord(a * b)
            assert (oa < ob) == (a < b) and (oa == ob) == (a == b)
    rng = random.Random(2024)
    triples = 10_000
    for _ in range(triples):
        a, b, c = (random_ord(rng, kappa=True) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert left_sub(a, a + b) == b
    elapsed = time.perf_counter() - start
    record_property("detail", f"10^6 integer pairs, {triples} triples, {elapsed:.1f}s")
    assert elapsed < 60


def test_criterion_02_bamboo_ground_truth(record_property):
    start = time.perf_counter()
    b = bamboo()
    assert b.theta(W) == 2
    assert b.theta(Ord(5)) == 1
    assert b.theta(omega_pow(2) * 3) == 3
    assert b.theta(omega_pow(W)) == W
    rep = check_condition(b, budget=10_000, seed=0)
    elapsed = time.perf_counter() - start
    record_property("detail", f"budget 10^4, {elapsed:.1f}s")
    assert rep.ok, rep.failed()
    assert elapsed < 60


def test_criterion_03_constructor_soundness(record_property):
    start = time.perf_counter()
    terms = corpus()
    assert len(terms) >= 50
    failures = [i for i, p in enumerate(terms) if not check_condition(p, budget=300, seed=i).ok]
    mutants = mutation_corpus()
    missed = [axiom for axiom, m in mutants if check_condition(m, budget=600, seed=0).records[axiom].ok]
    elapsed = time.perf_counter() - start
    record_property("detail", f"{len(terms)} terms, {len(mutants)} mutants, {elapsed:.0f}s")
    assert failures == []
    assert missed == []
    assert elapsed < 600


def test_criterion_04_extension_certificates(record_property):
    steps = [s for p in corpus() for s in constructor_steps(p)]
    statuses = [leq(out, inp).status for out, inp in steps]
    assert statuses and all(s == "Proven" for s in statuses)
    # chains of constructor steps: out <= mid <= inner
    chains = 0
    for p in corpus()[:20]:
        for mid, inner in constructor_steps(p):
            for out, parent in constructor_steps(p):
                if parent is mid:
                    assert leq_transitive_check(inner, mid, out).ok
                    chains += 1
    script = [EnsureS([W * 5]), EnsureLambda(omega_pow(W) * 3), EnsureEmu(),
              EnsureS([W * 12]), EnsureLambda(omega_pow(W * 4))]
    runs = [run(script, budget=100, seed=s) for s in range(2)] + [run(s, budget=100) for s, _ in patch_scenarios()[::3]]
    pairs = 0
    for r in runs:
        conds = r.conditions
        for i in range(len(conds)):
            for j in range(i + 1, len(conds)):
                assert leq(conds[j], conds[i]).proven
                pairs += 1
    record_property("detail", f"{len(steps)} steps Proven, {chains} chains, {pairs} run pairs")
    assert chains > 0


def test_criterion_05_amalgamation(record_property):
    p2 = add_block(bamboo(), W * 5)
    q2 = replace_s(p2, [0, W * 9])
    r = amalgam(p2, q2)
    assert r.lam == p2.lam + omega_pow(W * 3)
    assert r.blocks == (Ord(0), W * 5, W * 9)
    assert check_condition(r, budget=1500, seed=5).ok
    levels = [Ord(0), W, p2.lam, r.lam, KAPPA]
    assert check_fragment(extract_fragment(r, levels, W * 3, per_block=2)).ok
    assert leq(r, p2).proven and leq(r, q2).proven
    record_property("detail", "lambda = lambda_p + w^(w*3)")


def test_criterion_06_homogeneity(record_property):
    start = time.perf_counter()
    p, r = swap_setup()
    swap = AutoMap(p, r)
    assert swap(p) == r and swap(r) == p
    rng = random.Random(6)
    queries = 0
    while queries < 1000:
        for q in extensions_above(p if queries % 100 else r, rng, 2):
            assert query_disagreements(swap(swap(q)), q, rng, 50) == []
            queries += 50
    pairs = 0
    while pairs < 100:
        chain = extensions_above(p if pairs % 2 else r, rng, 3)
        for i in range(len(chain)):
            for j in range(i + 1, len(chain)):
                assert leq(chain[j], chain[i]).proven
                assert leq(swap(chain[j]), swap(chain[i])).proven
                pairs += 1
    scenarios = patch_scenarios()
    assert len(scenarios) >= 10
    for script, target in scenarios:
        out = patch(run(script, budget=100), target, budget=100)
        assert out.steps[0].condition is target
        assert leq(out.final, target).proven
    elapsed = time.perf_counter() - start
    record_property("detail", f"{queries} queries, {pairs} pairs, {len(scenarios)} patches, {elapsed:.0f}s")
    assert elapsed < 300


def test_criterion_07_coding_round_trip(record_property):
    start = time.perf_counter()
    facts = 0
    for i, p in enumerate(corpus()):
        window, expect = window_for(p, random.Random(i))
        dec = decode_window(lambda x: code_at(p, x), window, Skeleton.of(p))
        assert decoded_matches(dec, expect) == []
        facts += len(window)
    zero_rows = 0
    for p in corpus():
        for beta in determined_levels(p):
            for zeta in (0, 1, 2, W, W * 2 + 1, Ord(37)):
                assert code_at(p, theta_position(beta, zeta)).value == 0
                zero_rows += 1
    rng = random.Random(7)
    pairs = 0
    for p in corpus():
        for out, inp in constructor_steps(p):
            pairs += 1
            for pos in sample_positions(inp, rng, 20):
                bit = code_at(inp, pos).value
                if bit is not None:
                    assert code_at(out, pos).value == bit
    prefixes = 0
    for p in corpus():
        for seg in p.segments:
            for blocks, extra in segment_prefixes(seg):
                gamma = seg.start + W * blocks + extra
                if gamma <= p.lam + 1:
                    assert iota(p, gamma) == brute_iota_in_segment(p, seg, blocks, extra)
                    prefixes += 1
    elapsed = time.perf_counter() - start
    record_property("detail", f"{facts} window positions, {zero_rows} zero rows, {pairs} pairs, "
                              f"{prefixes} prefixes, {elapsed:.0f}s")
    assert elapsed < 600


def test_criterion_08_reconstruction(record_property):
    levels = 0
    for p in corpus():
        for beta in determined_levels(p):
            _, bad = reconstruction_round_trip(p, beta)
            assert bad == [], (p, beta)
            levels += 1
    record_property("detail", f"{levels} determined levels")
    assert levels >= len(corpus())


def test_criterion_09_universal_layer(record_property):
    aprime = APrime([0, W])
    script = [EnsureS([W * 3]), EnsureLambda(omega_pow(W * 3)), EnsureEmu(),
              EnsureS([W * 8]), EnsureLambda(omega_pow(W * 5))]
    r = run(script, "universal", aprime, budget=100)
    assert len(r.steps) == 6
    for c in r.conditions:
        assert check_universal(c, aprime, 200).ok
    frag = limit_fragment(r)
    assert frag.a_sets
    assert augmented_law_failures(frag) == []
    p2 = add_block(bamboo(), W * 5)
    q2 = replace_s(p2, [0, W * 9])
    lone = APrime([W * 5])
    differ = set(f_pullback(p2, lone)) ^ set(f_pullback(q2, lone))
    assert len(differ) == 1
    with pytest.raises(PullbackMismatch):
        amalgam_u(p2, q2, lone)
    record_property("detail", f"{len(r.conditions)} conditions, {len(frag.edges)} decorated edges")


CLI_TERM = '{"kind": "add_block", "parent": {"kind": "bamboo"}, "sigma": "w*7"}'
CLI_SCRIPT = json.dumps([{"kind": "ensure_s", "targets": ["w*5"]},
                         {"kind": "ensure_lambda", "beta": "w^(w)*3"},
                         {"kind": "ensure_emu"}])


def _cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "mangrove", *argv], capture_output=True, check=False)
    return proc.returncode, proc.stdout


def test_criterion_10_reproducibility(record_property, tmp_path):
    term, script, aprime = tmp_path / "term.json", tmp_path / "script.json", tmp_path / "aprime.txt"
    term.write_text(CLI_TERM)
    script.write_text(CLI_SCRIPT)
    aprime.write_text("0\nw\n")
    run_path = tmp_path / "run.json"
    first = _cli("simulate", str(script), "--seed", "3", "--budget", "100", "--out", str(run_path))
    assert first[0] == 0
    invocations = [
        ("check", str(term), "--seed", "3", "--budget", "300", "--aprime", str(aprime)),
        ("code", str(term), "--range", "0..w*40"),
        ("simulate", str(script), "--seed", "3", "--budget", "100"),
        ("simulate", str(script), "--mode", "universal", "--aprime", str(aprime), "--seed", "3", "--budget", "100"),
        ("export", str(term)),
        ("export", str(run_path), "--dot"),
        ("patch", str(run_path), str(term), "--seed", "3", "--budget", "100"),
    ]
    for argv in invocations:
        once, twice = _cli(*argv), _cli(*argv)
        assert once[0] == 0, argv
        assert once[1] and once == twice, argv
    record_property("detail", f"{len(invocations)} invocations byte-identical")
