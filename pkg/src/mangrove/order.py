"""The mangrove order: extension, mu-equivalence, compatibility and friends."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .cond import Condition, Node, add_block, amalgam, replace_s
from .errors import AboveLambda, ConditionError, DomainMismatch, NotLimit
from .kord import (
    KAPPA,
    OMEGA,
    ZERO,
    PiecewiseShift,
    check_sloop,
    fmt,
    omega_pow,
    ord_,
    random_below,
)
from .verdict import Verdict, proven, refuted, unknown

__all__ = [
    "Verdict", "leq", "leq_transitive_check", "TransitivityReport", "mu_equiv",
    "compatible", "in_suborder", "in_upper", "sigma_f", "reduction",
    "difference_witness",
]


def _probe_orders(width, rng, extra=4):
    """Orders below ``width``: small ones, block starts, a few random ones."""
    out = {ZERO}
    for o in (1, 2, OMEGA, OMEGA + 1, OMEGA * 2, OMEGA * 2 + 1):
        if ord_(o) < width:
            out.add(ord_(o))
    for _ in range(extra):
        out.add(random_below(rng, width))
    return sorted(out)


def _probe_levels(p: Condition, q: Condition, mu, rng, extra):
    levels = {ZERO, mu}
    for c in (p, q):
        for seg in c.descriptor(mu):
            for lvl in (seg.start, seg.end, seg.start + 1, seg.start + OMEGA,
                        seg.start + omega_pow(2), seg.start + omega_pow(OMEGA)):
                if lvl <= mu:
                    levels.add(lvl)
    for _ in range(extra):
        if mu:
            levels.add(random_below(rng, mu))
    return sorted(levels)


def difference_witness(p: Condition, q: Condition, mu, budget=200, seed=0):
    """Search for a query on which p and q differ at or below level mu."""
    rng = random.Random(seed)
    levels = _probe_levels(p, q, mu, rng, max(1, budget // 10))
    for lvl in levels:
        tp, tq = p.theta(lvl), q.theta(lvl)
        if tp != tq:
            return {"query": "theta", "level": lvl, "left": tp, "right": tq}
    for lvl in levels:
        for o in _probe_orders(p.theta(lvl), rng, 2):
            y = Node(lvl, o)
            for below in levels:
                if below >= lvl:
                    break
                a, b = p.pred(y, below), q.pred(y, below)
                if a != b:
                    return {"query": "pred", "node": y, "level": below,
                            "left": a[0] if a else None, "right": b[0] if b else None}
    return None


def mu_equiv(p: Condition, q: Condition, mu, budget=200, seed=0) -> Verdict:
    """Whether p and q agree up to level mu, which must be a mangal of both."""
    mu = ord_(mu)
    if mu > p.lam or mu > q.lam:
        raise AboveLambda(f"{fmt(mu)} exceeds a lambda of the inputs")
    for name, c in (("left", p), ("right", q)):
        st = c.mangal_status(mu)
        if st.refuted:
            return refuted({"not_a_mangal_of": name, "crossing": st.witness},
                           f"{fmt(mu)} is not a mangal of the {name} condition")
    if p.descriptor(mu) == q.descriptor(mu):
        return proven("descriptors agree up to mu and mu is a mangal of both")
    wit = difference_witness(p, q, mu, budget, seed)
    if wit is not None:
        return refuted(wit, "the conditions differ below mu")
    return unknown(budget, seed, "descriptors differ but no differing query was found")


def leq(q: Condition, p: Condition, budget=200, seed=0) -> Verdict:
    """Whether q extends p."""
    if q is p or q == p:
        return proven("identical conditions")
    missing = [b for b in p.blocks if b not in q.blocks]
    if missing:
        return refuted({"missing_block": missing[0]}, "S^p is not contained in S^q")
    if p.lam > q.lam:
        return refuted({"lambda_p": p.lam, "lambda_q": q.lam}, "lambda^p exceeds lambda^q")
    if q.descriptor(p.lam) != p.segments:
        wit = difference_witness(q, p, p.lam, budget, seed)
        if wit is not None:
            return refuted(wit, "the conditions differ below lambda^p")
        return unknown(budget, seed, "lower parts differ structurally; no witness found")
    for base in p.blocks:
        for n in range(3):
            tau = base + n
            want = p.f_inv(tau)
            got = q.pred(Node(KAPPA, tau), p.lam)
            if got is None or got[0] != want or got[1] != p.f.restrict(want + 1):
                return refuted({"tau": tau, "expected": want,
                                "found": None if got is None else got[0]},
                               "f^q does not factor through f^p")
    st = q.mangal_status(p.lam)
    if st.refuted:
        return refuted({"crossing": st.witness}, "lambda^p is not a mangal of q")
    return proven("blocks, lower part, f-factoring and the mangal clause all hold")


@dataclass
class TransitivityReport:
    ok: bool
    verdicts: dict = field(default_factory=dict)

    def to_doc(self):
        return {"ok": self.ok, "verdicts": {k: v.to_doc() for k, v in self.verdicts.items()}}


def leq_transitive_check(p: Condition, q: Condition, r: Condition) -> TransitivityReport:
    """Given q <= p and r <= q, confirm r <= p."""
    v = {"q<=p": leq(q, p), "r<=q": leq(r, q), "r<=p": leq(r, p)}
    ok = not (v["q<=p"].proven and v["r<=q"].proven) or v["r<=p"].proven
    return TransitivityReport(ok, v)


def _f_conflict(p: Condition, q: Condition):
    """A shared top node whose predecessor at min(lambda) differs."""
    if p.lam > q.lam:
        p, q = q, p
    for base in p.blocks:
        for n in range(3):
            tau = base + n
            if not q.in_s(tau):
                continue
            want = p.f_inv(tau)
            got = q.pred(Node(KAPPA, tau), p.lam)
            if got is None or got[0] != want:
                return {"tau": tau, "level": p.lam, "low": want,
                        "high": None if got is None else got[0]}
    return None


def compatible(p: Condition, q: Condition, budget=200, seed=0) -> Verdict:
    """Whether p and q have a common extension."""
    if leq(p, q, budget, seed).proven:
        return Verdict("Proven", witness=p, detail="the left condition extends the right one")
    if leq(q, p, budget, seed).proven:
        return Verdict("Proven", witness=q, detail="the right condition extends the left one")
    for a, b in ((p, q), (q, p)):
        try:
            r = amalgam(a, b)
        except ConditionError:
            continue
        if leq(r, p, budget, seed).proven and leq(r, q, budget, seed).proven:
            return Verdict("Proven", witness=r, detail="amalgamation is a common extension")
    conflict = _f_conflict(p, q)
    if conflict is not None:
        return refuted(conflict, "a shared top node sits above different nodes")
    low, high = (p, q) if p.lam <= q.lam else (q, p)
    eq = mu_equiv(low, high, low.lam, budget, seed)
    if eq.refuted:
        return refuted(eq.witness, "compatible conditions agree up to the smaller lambda")
    return unknown(budget, seed, "no common extension or conflict found")


def in_suborder(p: Condition, alpha) -> bool:
    return p.blocks[-1] + OMEGA <= ord_(alpha)


def in_upper(p: Condition, alpha) -> bool:
    return p.lam >= ord_(alpha)


def sigma_f(f: PiecewiseShift, p: Condition) -> Condition:
    """Move the blocks of p through the order map f."""
    rep = check_sloop(f)
    if not rep.ok:
        raise DomainMismatch("the map is not SLOOP: " + "; ".join(rep.failures))
    if p.blocks[-1] + OMEGA > f.domain:
        raise DomainMismatch(f"S^p reaches {fmt(p.blocks[-1] + OMEGA)}, beyond {fmt(f.domain)}")
    return replace_s(p, sorted((f(b) for b in p.blocks), key=lambda b: b.key))


def reduction(q: Condition, alpha) -> Condition:
    """Keep the blocks below alpha and slide the rest down to sup of those."""
    alpha = ord_(alpha)
    if not alpha.is_limit:
        raise NotLimit(f"{fmt(alpha)} is not a limit")
    keep = [b for b in q.blocks if b < alpha]
    rest = len(q.blocks) - len(keep)
    if not rest:
        return q
    tau = keep[-1] + OMEGA
    return replace_s(q, keep + [tau + OMEGA * i for i in range(rest)])


def add_blocks(p: Condition, bases) -> Condition:
    for b in sorted({ord_(b) for b in bases}, key=lambda b: b.key):
        p = add_block(p, b)
    return p
