"""Universal morass conditions for a finite predicate A' on kappa^+."""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import cond as _cond
from .cond import Condition, Node
from .errors import NotRelated, PullbackMismatch, RecursionDepth, TermFormatError
from .kord import (
    KAPPA,
    OMEGA,
    ZERO,
    div_omega_pow,
    fmt,
    iv_covers,
    left_sub,
    ord_,
    parse,
    shift_preimage,
)
from .morcode import (
    code_at,
    delta_sum,
    iota,
    split_position,
)
from .verify import Fragment, Report, _edge_nodes, sample_node

__all__ = [
    "APrime", "chi", "pullback", "kappa_targets", "check_universal",
    "add_block_u", "tower_ext_u", "amalgam_u", "f_pullback", "decorate_fragment",
]

REQUIREMENTS = ("S_in_code_domain", "pullback_agreement", "kappa_coverage")
MAX_DEPTH = 32


@dataclass(frozen=True)
class APrime:
    """A finite subset of kappa^+, kept sorted."""

    members: tuple

    def __init__(self, members=()):
        vals = sorted({ord_(m) for m in members}, key=lambda m: m.key)
        object.__setattr__(self, "members", tuple(vals))

    def __contains__(self, nu):
        return ord_(nu) in set(self.members)

    def membership(self, nu) -> int:
        return int(ord_(nu) in set(self.members))

    def support_in(self, lo, hi):
        lo, hi = ord_(lo), ord_(hi)
        return [m for m in self.members if lo <= m < hi]

    def dumps(self):
        return "".join(fmt(m) + "\n" for m in self.members)

    @classmethod
    def loads(cls, text):
        vals = []
        for line in text.splitlines():
            line = line.strip()
            if line:
                vals.append(parse(line))
        if [v.key for v in vals] != sorted(v.key for v in vals):
            raise TermFormatError("A' members must be listed in increasing order")
        return cls(vals)


def chi(p: Condition, a: APrime, tau):
    """1, 0 or None (undefined) at the position tau."""
    tau = ord_(tau)
    if tau.is_successor:
        return a.membership(tau.pred())
    return code_at(p, tau).value


def kappa_targets(p: Condition, x, candidates=None):
    """The tau among ``candidates`` (default: the first members of each block) above x."""
    x = Node.of(*x)
    if candidates is None:
        candidates = [b + j for b in p.blocks for j in range(4)]
    out = []
    for tau in candidates:
        got = p.pred(Node(KAPPA, tau), x.level)
        if got is not None and got[0] == x.order:
            out.append(ord_(tau))
    return out


def _member_candidates(p: Condition, a: APrime, tau):
    """Points below tau that can lie in A_kappa: block bases and successors of A' members."""
    pts = [b for b in p.blocks if b < tau]
    pts += [m + 1 for m in a.members if m + 1 < tau]
    return pts


def pullback(p: Condition, a: APrime, x, tau):
    """{gamma < o(x) : pi(gamma) is in A_kappa below tau} for the map from x to <kappa, tau>."""
    x, tau = Node.of(*x), ord_(tau)
    got = p.pred(Node(KAPPA, tau), x.level)
    if got is None or got[0] != x.order:
        raise NotRelated(f"{x} is not below <kappa, {fmt(tau)}>")
    m = got[1]
    out = set()
    for v in _member_candidates(p, a, tau):
        if chi(p, a, v) == 1:
            g = shift_preimage(m, v)
            if g is not None and g < x.order:
                out.add(g)
    return tuple(sorted(out, key=lambda g: g.key))


def f_pullback(p: Condition, a: APrime):
    """Orders nu at the top with f(nu) in A_kappa."""
    out = set()
    for v in _member_candidates(p, a, p.blocks[-1] + OMEGA):
        if p.in_s(v) and chi(p, a, v) == 1:
            out.add(p.f_inv(v))
    return tuple(sorted(out, key=lambda g: g.key))


def check_universal(p: Condition, a: APrime, budget=200, seed=0) -> Report:
    rng = random.Random(seed)
    rep = Report.fresh(f"universal lambda={fmt(p.lam)}", seed, budget, REQUIREMENTS)

    rec = rep.records["S_in_code_domain"]
    for b in p.blocks:
        rec.checked += 1
        if code_at(p, b).value is None:
            rec.fail({"block": b, "clause": split_position(b)[0]},
                     "block base outside the domain of the code")

    rec = rep.records["kappa_coverage"]
    rec.checked += 1
    if p.theta(p.lam) != p.ot:
        rec.fail({"theta_top": p.theta(p.lam), "ot": p.ot}, "top width differs from ot(S)")
    levels = {n.level for n in _edge_nodes(p) if n.level != KAPPA}
    levels |= {sample_node(p, rng).level for _ in range(budget // 4)} - {KAPPA}
    for lvl in sorted(levels):
        rec.checked += 1
        width = p.theta(lvl)
        reach = p.kappa_reach(lvl)
        if not iv_covers(reach, ZERO, width):
            gap = ZERO
            for lo, hi in reach:
                if lo > gap:
                    break
                gap = hi
            rec.fail({"node": Node(lvl, gap)}, "a node reaches no kappa node")

    rec = rep.records["pullback_agreement"]
    nodes = [n for n in _edge_nodes(p) if n.level != KAPPA]
    nodes += [n for n in (sample_node(p, rng) for _ in range(budget)) if n.level != KAPPA]
    for x in nodes:
        if not p.contains(x):
            continue
        taus = kappa_targets(p, x)
        if len(taus) < 2:
            continue
        first = pullback(p, a, x, taus[0])
        for tau in taus[1:]:
            rec.checked += 1
            other = pullback(p, a, x, tau)
            if other != first:
                rec.fail({"x": x, "taus": [taus[0], tau], "sets": [list(first), list(other)]},
                         "pullbacks along two kappa targets differ")
    return rep


def tower_ext_u(p: Condition, alpha, a: APrime) -> Condition:
    return _cond.tower_ext(p, alpha)


def _tower_past(p: Condition, bound, a: APrime) -> Condition:
    """Tower once so that lambda exceeds ``bound``."""
    g = p.ot
    whole, _ = div_omega_pow(p.lam, g)
    b, _ = div_omega_pow(bound, g)
    coeff = left_sub(whole, b + 1) if b + 1 > whole else ord_(1)
    return tower_ext_u(p, coeff, a)


def add_block_u(p: Condition, sigma, a: APrime, _depth=0) -> Condition:
    """add_block, after making sure the new base is a coded position."""
    sigma = ord_(sigma)
    if _depth > MAX_DEPTH:
        raise RecursionDepth(f"clause-4 dependencies nest deeper than {MAX_DEPTH}")
    if p.in_s(sigma):
        return p
    clause, par = split_position(sigma)
    if clause == 1:
        if par["level"] >= p.lam:
            p = _tower_past(p, par["level"], a)
    elif clause in (2, 3):
        need = max(par["alpha"], par["zeta"])
        while iota(p, p.lam) <= need:
            p = _tower_past(p, need, a)
    elif clause == 4:
        while delta_sum(p, p.lam + 1) <= par["alpha"]:
            p = _tower_past(p, par["alpha"], a)
        tau = par["tau"]
        if tau != sigma and not p.in_s(tau):
            p = add_block_u(p, tau.limit_part, a, _depth + 1)
    return _cond.add_block(p, sigma)


def amalgam_u(p: Condition, q: Condition, a: APrime) -> Condition:
    left, right = f_pullback(p, a), f_pullback(q, a)
    if left != right:
        diff = sorted(set(left) ^ set(right), key=lambda g: g.key)
        raise PullbackMismatch(
            f"f-pullbacks of A_kappa differ at {', '.join(fmt(g) for g in diff)}")
    return _cond.amalgam(p, q)


def decorate_fragment(frag: Fragment, p: Condition, a: APrime) -> Fragment:
    """Attach A_x to every fragment node with a kappa edge inside the fragment."""
    a_sets = {}
    for x, y in frag.edges:
        if y.level == KAPPA and x.level != KAPPA and x not in a_sets:
            a_sets[x] = pullback(p, a, x, y.order)
    for n in frag.nodes:
        if n.level == KAPPA:
            a_sets[n] = tuple(sorted((v for v in _member_candidates(p, a, n.order)
                                      if chi(p, a, v) == 1), key=lambda g: g.key))
    return Fragment(frag.nodes, frag.edges, frag.pi_tables, frag.theta_table, a_sets,
                    dict(frag.origin))
