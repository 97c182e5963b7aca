"""Independent reference computations the test modules compare against."""

from __future__ import annotations

import random
from functools import lru_cache

from mangrove.cond import Node, random_condition
from mangrove.kord import (
    KAPPA,
    OMEGA,
    ZERO,
    Ord,
    left_sub,
    omega_pow,
    shift_preimage,
)
from mangrove.morcode import (
    delta_sum,
    iota,
    is_determined_mangal,
    kappa_position,
    m_enum,
    n_enum,
    pi_position,
    reconstruct_determined_level,
    theta_position,
    tree_position,
)
from mangrove.verify import _fragment_orders, extract_fragment

CORPUS_SIZE = 60
CORPUS_DEPTH = 6


@lru_cache(maxsize=1)
def corpus():
    """Seeded random constructor terms of depth at most six."""
    return tuple(random_condition(random.Random(seed), CORPUS_DEPTH) for seed in range(CORPUS_SIZE))


# ordinals below omega^omega as coefficient tuples --------------------------------
# (c_d, ..., c_1, c_0) stands for omega^d*c_d + ... + c_0, no leading zeros.

def poly_trim(c):
    c = list(c)
    while c and c[0] == 0:
        c.pop(0)
    return tuple(c)


def poly_deg(c):
    return len(c) - 1


def poly_add(a, b):
    if not b:
        return a
    if not a:
        return b
    db = poly_deg(b)
    if poly_deg(a) < db:
        return b
    keep = list(a[: len(a) - db - 1])
    lead = a[len(a) - db - 1] + b[0]
    return poly_trim(keep + [lead] + list(b[1:]))


def poly_mul(a, b):
    """Right-distribute over the terms of b: a*omega^d = omega^(deg a + d) for d > 0."""
    if not a or not b:
        return ()
    out = ()
    da = poly_deg(a)
    for i, n in enumerate(b):
        d = poly_deg(b) - i
        if not n:
            continue
        if d == 0:
            part = (a[0] * n,) + tuple(a[1:])
        else:
            part = (n,) + (0,) * (da + d)
        out = poly_add(out, part)
    return out


def poly_lt(a, b):
    if len(a) != len(b):
        return len(a) < len(b)
    return a < b


def poly_to_ord(c):
    out = ZERO
    for i, n in enumerate(c):
        if n:
            out = out + omega_pow(len(c) - 1 - i) * n
    return out


def random_poly(rng, max_deg=4, max_coeff=6):
    d = rng.randint(0, max_deg)
    c = [rng.randint(0, max_coeff) for _ in range(d + 1)]
    return poly_trim(c)


# max-lex pairing by enumeration -----------------------------------------------

def maxlex_rank_table(bound):
    pairs = sorted(((t, n) for t in range(bound) for n in range(bound)),
                   key=lambda tn: (max(tn), tn))
    return {tn: i for i, tn in enumerate(pairs)}


# level sums by explicit partial sums --------------------------------------------

def brute_iota_in_segment(p, seg, blocks, extra):
    """iota at seg.start + omega*blocks + extra, summed level by level.

    Levels seg.start + omega*j + k with k >= 1 have width 1 (degree 0), so a
    whole run of them contributes omega; the limit level seg.start + omega*j
    (j >= 1) contributes its own width.
    """
    total = iota(p, seg.start + 1)
    for j in range(blocks + (1 if extra else 0)):
        if j:
            total = total + p.theta(seg.start + OMEGA * j)
        if j < blocks:
            total = total + OMEGA
        else:
            total = total + (extra - 1)
    return total


def segment_prefixes(seg, max_blocks=4, max_extra=3):
    for b in range(max_blocks + 1):
        for e in range(max_extra + 1):
            if not b and not e:
                continue
            off = OMEGA * b + e
            if off <= seg.length + 1:
                yield b, e


# decode round trip ------------------------------------------------------------------

def window_for(p, rng, rows=6, pairs=6, links=6):
    """A window of code positions together with the facts they should decode to."""
    expect = {"theta": {}, "theta_at_least": {}, "determined": set(), "tree": {}, "pi": {},
              "kappa": {}}
    window = []
    levels = {ZERO, p.lam} | set(p.boundaries())
    levels |= {seg.start + OMEGA for seg in p.segments if OMEGA <= seg.length}
    levels |= {seg.start + 3 for seg in p.segments if seg.length >= 3}
    for level in sorted(levels)[:rows]:
        window.extend(theta_position(level, z) for z in range(6))
        if is_determined_mangal(p, level).proven if level else False:
            expect["determined"].add(level)
            continue
        width = p.theta(level)
        if width.is_nat and int(width) <= 5:
            expect["theta"][level] = width
        else:
            expect["theta_at_least"][level] = Ord(6)
    top = iota(p, p.lam)
    small = [Ord(i) for i in range(4)] + [OMEGA, OMEGA + 1, OMEGA * 2]
    idx = [a for a in small if a < top]
    for _ in range(pairs):
        a, z = rng.choice(idx), rng.choice(idx + [top] if top.is_nat else idx)
        x, y = m_enum(p, a), m_enum(p, z) if z < top else None
        if y is None:
            continue
        window.append(tree_position(a, z))
        related = x.level < y.level and p.tree_rel(x, y)
        expect["tree"][(x, y)] = related
        if related:
            m = p.pi_map(x, y)
            for g in _some_orders(x.order):
                eta = m(g)
                window.append(pi_position(a, z, eta))
                expect["pi"][(x, y, eta)] = True
    dtop = delta_sum(p, p.lam + 1)
    nidx = [a for a in small if a < dtop]
    for _ in range(links):
        alpha = rng.choice(nidx)
        tau = rng.choice(p.blocks) + rng.randint(0, 2)
        x = n_enum(p, alpha)
        got = p.pred(Node(KAPPA, tau), x.level)
        if got is None or got[0] != x.order:
            nu = ZERO
            expect["kappa"][(x, tau, nu)] = False
        else:
            nu = got[1](ZERO)
            expect["kappa"][(x, tau, nu)] = True
            other = nu + 1
            window.append(kappa_position(tau, other, alpha))
            expect["kappa"][(x, tau, other)] = shift_preimage(got[1], other) is not None
        window.append(kappa_position(tau, nu, alpha))
    return window, expect


def _some_orders(order):
    """Orders 0 and 1 where they lie in [0, order]."""
    return [ZERO, Ord(1)] if order >= 1 else [ZERO]


def decoded_matches(decoded, expect):
    bad = []
    for key in ("theta", "theta_at_least", "tree", "pi", "kappa"):
        got = getattr(decoded, key)
        for k, v in expect[key].items():
            if got.get(k) != v:
                bad.append((key, k, v, got.get(k)))
    if not expect["determined"] <= decoded.determined:
        bad.append(("determined", expect["determined"] - decoded.determined))
    return bad


# reconstruction round trip ------------------------------------------------------------

def _drop_last_unit(off):
    (exp, n) = off.terms[-1]
    return Ord._make(off.terms[:-1] + (((exp, n - 1),) if n > 1 else ()))


def reconstruction_levels(p, beta, max_order, per_block):
    """Levels below beta that are high enough to witness every kappa class."""
    seg = p.segments[p.segment_index(beta)]
    base = seg.start + _drop_last_unit(left_sub(seg.start, beta))
    top = max(_fragment_orders(p.theta(beta), max_order, per_block), key=lambda o: o.key)
    levels = {base + omega_pow(d) for d in (ZERO, Ord(1), top, top + 1)}
    levels |= {a for a in p.boundaries() if a < beta} | {ZERO}
    return {a for a in levels if a < beta}


def reconstruction_round_trip(p, beta, max_order=OMEGA * 3, per_block=2):
    """Reconstruct level beta from the rest of a fragment and compare with the truth.

    Returns (reconstruction, mismatches).  The ground truth is read from the
    condition itself: level-beta fragment nodes with kappa edges, their
    predecessors among the lower fragment nodes, and their maps to kappa.
    """
    levels = reconstruction_levels(p, beta, max_order, per_block) | {beta, KAPPA}
    frag = extract_fragment(p, levels, max_order, 20000, per_block)
    hidden = hide_level(frag, beta)
    rec = reconstruct_determined_level(hidden, beta)
    lower = [n for n in frag.nodes if n.level != KAPPA and n.level < beta]
    ys = sorted((n for n in frag.nodes if n.level == beta and any(
        e[0] == n and e[1].level == KAPPA for e in frag.edges)), key=lambda n: n.order.key)
    bad = []
    if len(ys) != rec.theta:
        return rec, [("theta", len(ys), rec.theta)]
    for k, y in enumerate(ys):
        taus = {e[1].order for e in frag.edges if e[0] == y and e[1].level == KAPPA}
        if taus != set(rec.classes[k]):
            bad.append(("class", k))
        if {x for x in lower if p.tree_rel(x, y)} != rec.lower_edges[k]:
            bad.append(("edges", k))
        for tau in rec.classes[k]:
            m = p.pi_map(y, Node(KAPPA, tau))
            for j, v in rec.maps[(k, tau)].items():
                if m(ys[j].order) != v:
                    bad.append(("map", k, tau, j))
    return rec, bad


def hide_level(frag, beta):
    from mangrove.verify import Fragment
    keep = [n for n in frag.nodes if n.level != beta]
    edges = [e for e in frag.edges if e[0].level != beta and e[1].level != beta]
    pis = {e: frag.pi_tables[e] for e in edges}
    theta = {k: v for k, v in frag.theta_table.items() if k != beta}
    return Fragment(keep, edges, pis, theta, None, dict(frag.origin))


def determined_boundaries(p):
    return [b for b in p.boundaries() if b and is_determined_mangal(p, b).proven]


def constructor_steps(p, seen=None):
    """(output, input) for every add_block, tower_ext and amalgam inside the term."""
    seen = set() if seen is None else seen
    if id(p) in seen:
        return []
    seen.add(id(p))
    out = []
    parents = [a for a in p.args if hasattr(a, "kind")]
    if p.kind in ("add_block", "tower_ext", "amalgam"):
        out.extend((p, parent) for parent in parents)
    for parent in parents:
        out.extend(constructor_steps(parent, seen))
    return out


def query_disagreements(a, b, rng, count):
    """Sample queries on which the conditions a and b answer differently."""
    from mangrove.errors import MangroveError
    from mangrove.verify import sample_node
    bad = []
    if a.lam != b.lam or a.blocks != b.blocks:
        return [("shape", a.lam, b.lam)]
    for _ in range(count):
        y = sample_node(a, rng)
        if rng.random() < 0.5:
            y = sample_node(b, rng)
        if y.level != KAPPA and a.theta(y.level) != b.theta(y.level):
            bad.append(("theta", y.level))
            continue
        if a.contains(y) != b.contains(y):
            bad.append(("contains", y))
            continue
        if not a.contains(y) or not y.level:
            continue
        top = a.lam + 1 if y.level == KAPPA else y.level
        level = rng.choice([ZERO, top.limit_part or ZERO]) if rng.random() < 0.3 else None
        if level is None or level >= top:
            from mangrove.kord import random_below
            level = random_below(rng, top)
        try:
            pa, pb = a.pred(y, level), b.pred(y, level)
        except MangroveError as exc:
            bad.append(("error", y, level, str(exc)))
            continue
        if pa != pb:
            bad.append(("pred", y, level))
    return bad


def extensions_above(base, rng, steps=3):
    """A short random chain of extensions starting at base."""
    from mangrove.cond import add_block, tower_ext
    chain = [base]
    q = base
    for _ in range(steps):
        if rng.random() < 0.5:
            q = add_block(q, q.blocks[-1] + OMEGA * rng.randint(1, 5))
        else:
            q = tower_ext(q, rng.choice([1, 2, OMEGA]))
        chain.append(q)
    return chain


def swap_setup():
    """Two aligned conditions with equal blocks but different lower parts."""
    from mangrove.cond import add_block, bamboo, replace_s
    from mangrove.homog import align
    other = add_block(replace_s(add_block(bamboo(), OMEGA * 7), [ZERO]), OMEGA * 5)
    return align(bamboo(), other)


def patch_scenarios():
    """(script, target) pairs: a run from bamboo and a condition it must be moved below."""
    from mangrove.cond import add_block, bamboo, tower_ext
    from mangrove.sim import Custom, EnsureEmu, EnsureLambda, EnsureS
    scripts = [
        [EnsureS([OMEGA * 3])],
        [EnsureS([OMEGA * 2]), EnsureLambda(omega_pow(OMEGA * 3))],
        [EnsureLambda(omega_pow(OMEGA) * 3), EnsureEmu()],
        [Custom("tower_ext", 1), EnsureS([OMEGA * 11])],
    ]
    targets = [
        add_block(bamboo(), OMEGA * 5),
        add_block(bamboo(), OMEGA * 7),
        tower_ext(add_block(bamboo(), OMEGA * 4), 1),
    ]
    return [(s, t) for s in scripts for t in targets]


def sample_positions(p, rng, count=60):
    """Code positions spread over the four coded clauses of p."""
    from mangrove.kord import random_below
    out = []
    top, top_low, dtop = iota(p, p.lam + 1), iota(p, p.lam), delta_sum(p, p.lam + 1)
    for _ in range(count):
        roll = rng.random()
        if roll < 0.25:
            zeta = rng.randint(0, 5) if rng.random() < 0.7 else random_below(rng, OMEGA * 3)
            out.append(theta_position(random_below(rng, p.lam + 1), zeta))
        elif roll < 0.5:
            out.append(tree_position(random_below(rng, top_low), random_below(rng, top)))
        elif roll < 0.75:
            out.append(pi_position(random_below(rng, top_low), random_below(rng, top),
                                   random_below(rng, OMEGA * 2)))
        else:
            tau = rng.choice(p.blocks) + rng.randint(0, 3)
            out.append(kappa_position(tau, random_below(rng, tau + 1), random_below(rng, dtop)))
    return out


def augmented_law_failures(frag):
    """A_w = A_x cap o(w) on each level, and A_x = pi^-1 A_y on each edge."""
    sets = {n: set(v) for n, v in (frag.a_sets or {}).items()}
    bad = []
    by_level = {}
    for n in sets:
        if n.level != KAPPA:
            by_level.setdefault(n.level, []).append(n)
    for nodes in by_level.values():
        for w in nodes:
            for x in nodes:
                if w.order < x.order and sets[w] != {g for g in sets[x] if g < w.order}:
                    bad.append(("level", w, x))
    for x, y in frag.edges:
        if x in sets and y in sets:
            m = frag.pi_tables[(x, y)]
            pre = {shift_preimage(m, v) for v in sets[y] if v < y.order or y.level == KAPPA}
            pre = {g for g in pre if g is not None and g < x.order}
            if sets[x] != pre:
                bad.append(("edge", x, y))
    return bad


def determined_levels(p, per_condition=12):
    """Segment-boundary determined mangals plus the first few in increasing order."""
    from mangrove.morcode import next_determined
    out = set(determined_boundaries(p))
    level = ZERO
    for _ in range(per_condition):
        level = next_determined(p, level)
        if level is None:
            break
        out.add(level)
    return sorted(out)
