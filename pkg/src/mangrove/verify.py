"""Axiom checking for conditions and for extracted finite fragments.

Checkers only talk to a condition through its query methods (``theta``,
``contains``, ``pred``, ``tree_rel``, ``pi_map``, ``f_apply``, ``f_inv``,
``descending_orders``, ``immediate_pred`` and the ``blocks``, ``lam``,
``segments`` attributes).  That keeps them usable on ``MutantCondition``
wrappers, which is how the mutation corpus exercises each checker.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from .cond import Condition, Node, add_block, amalgam, bamboo, replace_s
from .errors import BudgetExceeded, MangroveError, TermFormatError
from .kord import (
    KAPPA,
    OMEGA,
    ONE,
    ZERO,
    Ord,
    PiecewiseShift,
    check_sloop,
    fmt,
    iv_covers,
    iv_image,
    iv_norm,
    left_sub,
    omega_pow,
    ord_,
    parse,
    random_below,
    shift_compose,
    wpow,
)
from .verdict import _plain

__all__ = [
    "AXIOMS", "AxiomRecord", "Report", "check_condition", "MutantCondition",
    "mutation_corpus", "Fragment", "extract_fragment", "check_fragment",
    "fragment_to_dot", "sample_node",
]

AXIOMS = (
    "left_alignment", "f_links", "tree_order", "monotonicity", "commutativity",
    "M1", "M2", "M3", "M4", "M5", "M6", "M7",
)
FRAGMENT_AXIOMS = (
    "membership", "monotonicity", "tree_order", "commutativity", "M1", "M2",
    "augmented",
)
MAX_WITNESSES = 5


@dataclass
class AxiomRecord:
    axiom: str
    checked: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    failure_count: int = 0

    @property
    def ok(self):
        return self.failure_count == 0

    def fail(self, witness, detail):
        self.failure_count += 1
        if len(self.failures) < MAX_WITNESSES:
            self.failures.append({"witness": _plain(witness), "detail": detail})

    def to_doc(self):
        return {
            "axiom": self.axiom,
            "checked": self.checked,
            "skipped": self.skipped,
            "verdict": "pass" if self.ok else "fail",
            "failure_count": self.failure_count,
            "failures": self.failures,
        }


@dataclass
class Report:
    subject: str
    seed: object
    budget: int
    records: dict

    @classmethod
    def fresh(cls, subject, seed, budget, axioms=AXIOMS):
        return cls(subject, seed, budget, {a: AxiomRecord(a) for a in axioms})

    @property
    def ok(self):
        return all(r.ok for r in self.records.values())

    def failed(self):
        return [a for a, r in self.records.items() if not r.ok]

    def to_doc(self):
        return {
            "subject": self.subject,
            "seed": self.seed,
            "budget": self.budget,
            "ok": self.ok,
            "axioms": [self.records[a].to_doc() for a in sorted(self.records)],
        }

    def dumps(self):
        return json.dumps(self.to_doc(), sort_keys=True, indent=2) + "\n"


# sampling -----------------------------------------------------------------

def _order_below(rng, width):
    """An order below width, biased towards limits and lane edges."""
    if not width:
        return ZERO
    roll = rng.random()
    if roll < 0.25:
        return ZERO
    if roll < 0.5 and width > OMEGA:
        lim = random_below(rng, width).limit_part
        return lim if rng.random() < 0.6 else min(lim + 1, width.pred() if width.is_successor else lim + 1)
    return random_below(rng, width)


def sample_node(p, rng) -> Node:
    """Pick a segment, then a level inside it, then an order at that level."""
    if rng.random() < 0.12:
        base = rng.choice(p.blocks)
        return Node(KAPPA, base + rng.randint(0, 4))
    seg = rng.choice(p.segments)
    beta = random_below(rng, seg.length) if rng.random() < 0.85 else seg.length
    if not beta:
        beta = seg.length
    level = seg.start + beta
    return Node(level, _order_below(rng, p.theta(level)))


def _edge_nodes(p):
    """Deterministic instances around segment starts, lanes and the top."""
    levels = {ZERO, p.lam}
    for seg in p.segments:
        for off in (ONE, OMEGA, omega_pow(2), omega_pow(3), omega_pow(OMEGA),
                    omega_pow(2) * 2 + OMEGA, omega_pow(OMEGA) * 2,
                    omega_pow(OMEGA * 2) * 2):
            if off <= seg.length:
                levels.add(seg.start + off)
        levels.add(seg.start)
        levels.add(seg.end)
        for lane in seg.lanes:
            for o in (lane.lo, lane.lo + 1):
                if o < seg.cap and omega_pow(o) * 2 <= seg.length:
                    levels.add(seg.start + omega_pow(o))
                    levels.add(seg.start + omega_pow(o) * 2)
    out = []
    for lvl in sorted(levels):
        width = p.theta(lvl)
        orders = {ZERO, width.pred() if width.is_successor else ZERO}
        for o in (ONE, 2, OMEGA, OMEGA + 1, OMEGA * 2, OMEGA * 2 + 1):
            if ord_(o) < width:
                orders.add(ord_(o))
        seg = p.segments[p.segment_index(lvl)] if lvl else None
        if seg is not None:
            for lane in seg.lanes:
                for o in (lane.lo, lane.lo + 1):
                    if o < width:
                        orders.add(o)
        out.extend(Node(lvl, o) for o in sorted(orders))
    for base in p.blocks:
        out.extend(Node(KAPPA, base + n) for n in range(3))
    return out


def _level_below(p, top, rng):
    """A level strictly below ``top`` (which is a level or KAPPA)."""
    cap = p.lam + 1 if top == KAPPA else top
    roll = rng.random()
    if roll < 0.15:
        return ZERO
    if roll < 0.35:
        starts = [s.start for s in p.segments if s.start < cap] + [
            s.end for s in p.segments if s.end < cap]
        return rng.choice(starts)
    return random_below(rng, cap)


def _level_between(p, low, top, rng):
    """A level strictly between ``low`` and ``top``, or None."""
    cap = p.lam + 1 if top == KAPPA else top
    if low + 1 >= cap:
        return None
    step = random_below(rng, left_sub(low, cap))
    if step and rng.random() < 0.6:
        step = Ord._make(step.terms[:1])
    return low + step if step else low + 1


def _probe_levels(level, order, start):
    """Levels approaching the limit ``level`` from below, above ``start``."""
    (k, e), n = level.terms[-1]
    head = Ord._make(level.terms[:-1] + ((((k, e), n - 1),) if n > 1 else ()))
    if e.is_successor:
        exps = [e.pred()]
        mults = [1, 2, 3, 5]
    else:
        c = ZERO
        if start > head:
            c = left_sub(head, start).lead_exp[1]
        b = max(order, c)
        exps = [b + i for i in range(4)]
        mults = [1, 2]
    out = []
    for ex in exps:
        for m in mults:
            lvl = head + wpow((0, ex), m)
            if start < lvl < level:
                out.append(lvl)
    return sorted(set(out))


# individual checks ----------------------------------------------------------

def _safe_pred(p, y, alpha):
    try:
        return p.pred(y, alpha)
    except MangroveError:
        return None


def _check_left_alignment(p, rep, y):
    rec = rep.records["left_alignment"]
    if y.level == KAPPA:
        return
    rec.checked += 1
    width = p.theta(y.level)
    if not (ZERO < width < KAPPA):
        rec.fail({"level": y.level, "theta": width}, "width must be positive and below kappa")
        return
    if not y.level and width != ONE:
        rec.fail({"level": ZERO, "theta": width}, "level 0 has width 1")
    if not p.contains(Node(y.level, ZERO)) or p.contains(Node(y.level, width)):
        rec.fail({"level": y.level}, "the nodes at a level are not an initial segment")


def _check_f_links(p, rep, rng):
    rec = rep.records["f_links"]
    ot = OMEGA * len(p.blocks)
    if ot > p.theta(p.lam):
        rec.fail({"ot": ot, "theta": p.theta(p.lam)}, "ot(S) exceeds the top width")
        return
    for i in range(len(p.blocks)):
        for nu in (OMEGA * i, OMEGA * i + 1, OMEGA * i + rng.randint(2, 9)):
            rec.checked += 1
            tau = p.f_apply(nu)
            x, y = Node(p.lam, nu), Node(KAPPA, tau)
            if p.f_inv(tau) != nu:
                rec.fail({"nu": nu, "tau": tau}, "f_inv does not invert f")
                continue
            got = _safe_pred(p, y, p.lam)
            if got is None or got[0] != nu:
                rec.fail({"x": x, "y": y}, "top node is not linked to its kappa image")
                continue
            m = got[1]
            if m != p.f.restrict(nu + 1):
                rec.fail({"x": x, "y": y, "map": m}, "the kappa link map is not f restricted")
                continue
            for g in {ZERO, nu, random_below(rng, nu + 1)}:
                if not p.contains(Node(KAPPA, m(g))):
                    rec.fail({"x": x, "y": y, "point": g}, "a map into level kappa leaves S")


def _check_tree_order(p, rep, y, rng, low=None):
    rec = rep.records["tree_order"]
    if not y.level:
        return
    if low is None:
        pair = sorted({_level_below(p, y.level, rng), _level_below(p, y.level, rng)})
    else:
        pair = [low, _level_between(p, low, y.level, rng)]
    if len(pair) < 2 or pair[1] is None:
        return
    a, b = pair
    rec.checked += 1
    pb = _safe_pred(p, y, b)
    pa = _safe_pred(p, y, a)
    if pb is None:
        return
    mid = Node(b, pb[0])
    via = _safe_pred(p, mid, a)
    ga = None if pa is None else pa[0]
    gv = None if via is None else via[0]
    if ga != gv:
        rec.fail({"y": y, "levels": [a, b], "direct": ga, "via": gv},
                 "predecessors of y are not linearly ordered")


def _check_monotonicity(p, rep, y, rng):
    rec = rep.records["monotonicity"]
    if y.level == KAPPA or not y.level:
        return
    width = p.theta(y.level)
    other = random_below(rng, width) if rng.random() < 0.5 else ZERO
    rec.checked += 1
    x = Node(y.level, other)
    if p.tree_rel(x, y) or p.tree_rel(y, x):
        rec.fail({"x": x, "y": y}, "related nodes on the same level")
    lvl = _level_below(p, y.level, rng)
    got = _safe_pred(p, y, lvl)
    if got is not None and not p.tree_rel(Node(lvl, got[0]), y):
        rec.fail({"x": Node(lvl, got[0]), "y": y}, "predecessor not related to y")
    if got is not None and p.tree_rel(y, Node(lvl, got[0])):
        rec.fail({"x": y, "y": Node(lvl, got[0])}, "relation runs downwards")


def _check_commutativity(p, rep, z, rng, mid=None):
    rec = rep.records["commutativity"]
    if not z.level:
        return
    b = _level_below(p, z.level, rng) if mid is None else mid
    if not b:
        return
    a = _level_below(p, b, rng)
    gy = _safe_pred(p, z, b)
    if gy is None:
        return
    y = Node(b, gy[0])
    gx = _safe_pred(p, y, a)
    if gx is None:
        return
    x = Node(a, gx[0])
    rec.checked += 1
    direct = _safe_pred(p, z, a)
    if direct is None or direct[0] != x.order:
        rec.fail({"x": x, "y": y, "z": z}, "x below y below z but not x below z")
        return
    try:
        composed = shift_compose(gy[1], gx[1])
    except MangroveError as exc:
        rec.fail({"x": x, "y": y, "z": z}, f"maps do not compose: {exc}")
        return
    if composed != direct[1].normalized():
        rec.fail({"x": x, "y": y, "z": z, "direct": direct[1], "composed": composed},
                 "pi_yz after pi_xy differs from pi_xz")
        return
    pts = {ZERO, x.order}
    for _ in range(4):
        pts.add(random_below(rng, x.order + 1))
    for g in pts:
        if direct[1](g) != gy[1](gx[1](g)):
            rec.fail({"x": x, "y": y, "z": z, "point": g}, "pointwise composition differs")
            break


def _check_m1(p, rep, y, rng, low=None):
    rec = rep.records["M1"]
    if not y.level:
        return
    lvl = _level_below(p, y.level, rng) if low is None else low
    got = _safe_pred(p, y, lvl)
    if got is None:
        return
    rec.checked += 1
    x = Node(lvl, got[0])
    m = got[1]
    sl = check_sloop(m)
    if not sl.ok:
        rec.fail({"x": x, "y": y, "map": m}, "map is not SLOOP: " + sl.failures[0])
    elif m.domain != x.order + 1 or m(x.order) != y.order:
        rec.fail({"x": x, "y": y, "map": m}, "map does not send o(x) to o(y)")


def _check_m2(p, rep, y, rng, low=None):
    rec = rep.records["M2"]
    if not y.level:
        return
    lvl = _level_below(p, y.level, rng) if low is None else low
    got = _safe_pred(p, y, lvl)
    if got is None or not got[0]:
        return
    x, m = Node(lvl, got[0]), got[1]
    nus = {random_below(rng, x.order)}
    nus.update(ord_(n) for n in (0, 1, 2, 5) if ord_(n) < x.order)
    if x.order.limit_part < x.order:
        nus.add(x.order.limit_part)
    for nu in nus:
        rec.checked += 1
        w, z = Node(lvl, nu), Node(y.level, m(nu))
        g = _safe_pred(p, z, lvl)
        if g is None or g[0] != nu:
            rec.fail({"x": x, "y": y, "w": w, "z": z}, "w is not below z")
        elif g[1] != m.restrict(nu + 1):
            rec.fail({"x": x, "y": y, "w": w, "z": z}, "pi_wz is not a restriction of pi_xy")


def _check_m3(p, rep, y, rng, low=None):
    rec = rep.records["M3"]
    if y.level == KAPPA or not y.level:
        return
    cands = [] if low is None else [low]
    cands += [s.start for s in p.segments if ZERO < s.start < y.level]
    cands += [s.end for s in p.segments if s.end < y.level]
    lvl = random_below(rng, y.level)
    if lvl.is_limit:
        cands.append(lvl)
    if y.level.limit_part > ZERO and y.level.limit_part < y.level:
        cands.append(y.level.limit_part)
    for limit in cands:
        for q in (limit.limit_part,):
            if not q.is_limit:
                continue
            probes = _probe_levels(q, y.order, ZERO)
            if not probes:
                continue
            rec.checked += 1
            if all(_safe_pred(p, y, pr) is not None for pr in probes):
                if _safe_pred(p, y, q) is None:
                    rec.fail({"y": y, "limit": q, "probes": probes},
                             "branch levels accumulate at a level off the branch")


def _unbounded_probes(p, y):
    seg = p.segments[p.segment_index(y.level)]
    return _probe_levels(y.level, y.order, seg.start)


def _check_m4_m5(p, rep, y):
    if y.level == KAPPA or not y.level:
        return
    width = p.theta(y.level)
    r4, r5 = rep.records["M4"], rep.records["M5"]
    if y.level.is_successor:
        r4.checked += 1
        if width != ONE:
            r4.fail({"level": y.level, "theta": width}, "successor level of width above 1")
        return
    if y.order + 1 == width:
        return
    probes = _unbounded_probes(p, y)
    r4.checked += 1
    found = [(pr, _safe_pred(p, y, pr)) for pr in probes]
    if not probes or found[-1][1] is None:
        r4.fail({"y": y, "probes": probes}, "branch of y is bounded below l(y)")
        return
    found = [(pr, g) for pr, g in found if g is not None]
    r5.checked += 1
    covered = []
    for pr, (o, m) in found:
        if o:
            covered.extend(iv_image(m.restrict(o), [(ZERO, o)]))
    if not iv_covers(iv_norm(covered), ZERO, y.order):
        r5.fail({"y": y, "probes": probes}, "o(y) is not the union of the images below")


def _check_m6_m7(p, rep, y, rng):
    if y.level == KAPPA or not y.level:
        return
    try:
        x = p.immediate_pred(y)
    except MangroveError:
        x = None
    if x is None or not x.order.is_limit:
        return
    got = _safe_pred(p, y, x.level)
    if got is None or got[0] != x.order:
        return
    m = got[1]
    head = m.restrict(x.order)
    nu = head.image_end
    r6 = rep.records["M6"]
    r6.checked += 1
    z = Node(y.level, nu)
    gz = _safe_pred(p, z, x.level)
    if gz is None or gz[0] != x.order:
        r6.fail({"x": x, "y": y, "z": z}, "x is not below the sup node z")
    elif gz[1].restrict(x.order) != head:
        r6.fail({"x": x, "y": y, "z": z}, "pi_xz and pi_xy differ below o(x)")
    if nu != y.order:
        return
    r7 = rep.records["M7"]
    alphas = {x.level + 1, x.level + OMEGA}
    gap = left_sub(x.level, y.level)
    alphas.add(x.level + random_below(rng, gap))
    for alpha in sorted(alphas):
        if not (x.level < alpha < y.level):
            continue
        r7.checked += 1
        reach = p.descending_orders(y.level, alpha)
        image = iv_image(head, [(ZERO, x.order)])
        if all(iv_covers(reach, a, b) for a, b in image):
            if _safe_pred(p, y, alpha) is None:
                r7.fail({"x": x, "y": y, "alpha": alpha},
                        "every node under the image reaches alpha but y does not")


def check_condition(p, budget=2000, seed=0) -> Report:
    """Run every axiom checker on edge instances plus ``budget`` random nodes."""
    rng = random.Random(seed)
    subject = getattr(p, "name", None) or f"condition lambda={fmt(p.lam)}"
    rep = Report.fresh(subject, seed, budget)
    _check_f_links(p, rep, rng)
    edges = _edge_nodes(p)
    focus = [y for y in getattr(p, "focus", ()) if p.contains(y)]
    hints = sorted({n.level for n in edges if n.level != KAPPA} | {p.lam})
    for y in focus:
        for low in hints:
            if low >= y.level:
                break
            for _ in range(4):
                _check_tree_order(p, rep, y, rng, low)
            _check_commutativity(p, rep, y, rng, low)
            _check_m1(p, rep, y, rng, low)
            _check_m2(p, rep, y, rng, low)
            _check_m3(p, rep, y, rng, low)
    nodes = edges + focus + [sample_node(p, rng) for _ in range(budget)]
    for y in nodes:
        _check_left_alignment(p, rep, y)
        if not p.contains(y):
            continue
        _check_tree_order(p, rep, y, rng)
        _check_monotonicity(p, rep, y, rng)
        _check_commutativity(p, rep, y, rng)
        _check_m1(p, rep, y, rng)
        _check_m2(p, rep, y, rng)
        _check_m3(p, rep, y, rng)
        _check_m4_m5(p, rep, y)
        _check_m6_m7(p, rep, y, rng)
    return rep


# mutation corpus ------------------------------------------------------------

class MutantCondition:
    """A condition with one query answer deliberately corrupted.

    ``theta_hook(alpha)`` and ``pred_hook(y, alpha)`` return a replacement
    answer, or ``NotImplemented`` to defer to the wrapped condition.
    """

    def __init__(self, base: Condition, name, *, theta_hook=None, pred_hook=None,
                 tree_hook=None, reach_hook=None, focus=()):
        self.base = base
        self.name = name
        self._theta = theta_hook
        self._pred = pred_hook
        self._tree = tree_hook
        self._reach = reach_hook
        self.focus = tuple(focus)

    def __getattr__(self, item):
        return getattr(self.base, item)

    def theta(self, alpha):
        if self._theta is not None:
            got = self._theta(ord_(alpha))
            if got is not NotImplemented:
                return got
        return self.base.theta(alpha)

    def contains(self, x):
        level, order = ord_(x[0]), ord_(x[1])
        if level == KAPPA:
            return self.base.contains(x)
        if not level.kappa_free or level > self.base.lam:
            return False
        return order < self.theta(level)

    def pred(self, y, alpha):
        if self._pred is not None:
            got = self._pred(Node.of(*y), ord_(alpha))
            if got is not NotImplemented:
                return got
        return self.base.pred(y, alpha)

    def tree_rel(self, x, y):
        x, y = Node.of(*x), Node.of(*y)
        if self._tree is not None:
            got = self._tree(x, y)
            if got is not NotImplemented:
                return got
        if not x.level < y.level:
            return False
        got = self.pred(y, x.level)
        return got is not None and got[0] == x.order

    def pi_map(self, x, y):
        got = self.pred(y, x[0])
        return got[1]

    def descending_orders(self, level, alpha):
        if self._reach is not None:
            got = self._reach(ord_(level), ord_(alpha))
            if got is not NotImplemented:
                return got
        return self.base.descending_orders(level, alpha)


def _shift(domain, pieces):
    return PiecewiseShift(ord_(domain), tuple((ord_(a), ord_(b)) for a, b in pieces))


def mutation_corpus():
    """One targeted corruption per axiom, as ``(axiom, mutant)`` pairs."""
    b = bamboo()
    p7 = add_block(b, OMEGA * 7)
    p2 = add_block(b, OMEGA * 5)
    r = amalgam(p2, replace_s(p2, [ZERO, OMEGA * 9]))
    w2, w3 = omega_pow(2), omega_pow(3)
    out = []

    out.append(("left_alignment", MutantCondition(
        b, "zero width at omega",
        theta_hook=lambda a: ZERO if a == OMEGA else NotImplemented)))

    def wrong_link(y, a):
        if y == Node(KAPPA, OMEGA * 7) and a == p7.lam:
            return ZERO, PiecewiseShift.identity(ONE)
        return NotImplemented
    out.append(("f_links", MutantCondition(p7, "kappa link to the wrong node",
                                           pred_hook=wrong_link)))

    def bent(y, a):
        if y == Node(w2, ONE) and a == OMEGA:
            return ZERO, PiecewiseShift.identity(ONE)
        return NotImplemented
    out.append(("tree_order", MutantCondition(
        b, "predecessor order changed", pred_hook=bent, focus=[Node(w2, ONE)])))

    out.append(("monotonicity", MutantCondition(
        b, "same-level relation",
        tree_hook=lambda x, y: True if (x, y) == (Node(OMEGA, ZERO), Node(OMEGA, ONE)) else NotImplemented,
        focus=[Node(OMEGA, ONE)])))

    top9 = Node(KAPPA, OMEGA * 9)
    bad = _shift(OMEGA * 2 + 1, [(0, 0), (OMEGA, OMEGA * 6), (OMEGA * 2, OMEGA * 9)])

    def twisted(y, a):
        if y == top9 and a == r.lam:
            return OMEGA * 2, bad
        return NotImplemented
    out.append(("commutativity", MutantCondition(r, "altered top map", pred_hook=twisted,
                                                 focus=[top9])))

    s7 = p7.segments[-1].start
    y1 = Node(s7 + omega_pow(OMEGA + 1), OMEGA)
    x1_level = s7 + omega_pow(OMEGA)
    skip = _shift(OMEGA + 1, [(0, 0), (1, 2)])

    def non_sloop(y, a):
        if y == y1 and a == x1_level:
            return OMEGA, skip
        return NotImplemented
    out.append(("M1", MutantCondition(p7, "non-SLOOP map", pred_hook=non_sloop,
                                      focus=[y1])))

    sr = r.segments[-1].start
    yr = Node(sr + omega_pow(OMEGA * 2), OMEGA * 2)

    def drop_five(y, a):
        if y.level > sr and y.level != KAPPA and y.order == 5 and a <= sr:
            return None
        return NotImplemented
    out.append(("M2", MutantCondition(r, "lost predecessor of a low-order node",
                                      pred_hook=drop_five, focus=[yr])))

    y3 = Node(w3, ONE)
    out.append(("M3", MutantCondition(
        b, "gap at a limit level",
        pred_hook=lambda y, a: None if (y == y3 and a == w2) else NotImplemented,
        focus=[y3])))

    y4 = Node(w2, ZERO)
    out.append(("M4", MutantCondition(
        b, "bounded branch",
        pred_hook=lambda y, a: None if (y == y4 and ZERO < a < w2) else NotImplemented,
        focus=[y4])))

    y5 = Node(w3, 2)
    squeeze = _shift(2, [(0, 0), (1, 2)])
    out.append(("M5", MutantCondition(
        b, "map squeezes the branch",
        pred_hook=lambda y, a: (ONE, squeeze) if (y == y5 and ZERO < a < w3) else NotImplemented,
        focus=[y5])))

    def drop_omega(y, a):
        if y.level > sr and y.level != KAPPA and y.order == OMEGA and a <= sr:
            return None
        return NotImplemented
    out.append(("M6", MutantCondition(r, "sup node detached", pred_hook=drop_omega,
                                      focus=[yr])))

    x7 = Node(s7 + omega_pow(OMEGA), OMEGA)
    y7 = Node(s7 + omega_pow(OMEGA) * 2, OMEGA)
    a7 = x7.level + 1

    def fake_width(a):
        return OMEGA if a == a7 else NotImplemented

    def fake_pred(y, a):
        if a == a7 and y.level == y7.level:
            if y.order < OMEGA:
                return y.order, PiecewiseShift.identity(y.order + 1)
            return None
        return NotImplemented

    def fake_reach(level, a):
        if a == a7 and level == y7.level:
            return iv_norm([(ZERO, OMEGA)])
        return NotImplemented
    out.append(("M7", MutantCondition(p7, "limit node misses a level its images reach",
                                      theta_hook=fake_width, pred_hook=fake_pred,
                                      reach_hook=fake_reach, focus=[y7])))
    return out


# fragments ------------------------------------------------------------------

@dataclass
class Fragment:
    nodes: list
    edges: list
    pi_tables: dict
    theta_table: dict
    a_sets: Optional[dict] = None
    origin: dict = field(default_factory=dict)

    def to_doc(self):
        doc = {
            "nodes": [n.to_doc() for n in self.nodes],
            "edges": [[x.to_doc(), y.to_doc(), self.pi_tables[(x, y)].to_doc()]
                      for x, y in self.edges],
            "theta": [[fmt(k), fmt(v)] for k, v in sorted(self.theta_table.items(),
                                                          key=lambda kv: kv[0].key)],
            "origin": self.origin,
        }
        if self.a_sets is not None:
            doc["a_sets"] = [[n.to_doc(), [fmt(v) for v in self.a_sets[n]]]
                             for n in self.nodes if n in self.a_sets]
        return doc

    def dumps(self):
        return json.dumps(self.to_doc(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_doc(cls, doc):
        if not isinstance(doc, dict) or not {"nodes", "edges", "theta"} <= set(doc):
            raise TermFormatError("a fragment has the fields nodes, edges, theta")
        try:
            nodes = [Node(parse(a), parse(b)) for a, b in doc["nodes"]]
            edges, pis = [], {}
            for x, y, m in doc["edges"]:
                x, y = Node(parse(x[0]), parse(x[1])), Node(parse(y[0]), parse(y[1]))
                edges.append((x, y))
                pis[(x, y)] = PiecewiseShift.from_doc(m)
            theta = {parse(k): parse(v) for k, v in doc["theta"]}
            a_sets = None
            if "a_sets" in doc:
                a_sets = {Node(parse(n[0]), parse(n[1])): tuple(parse(v) for v in vals)
                          for n, vals in doc["a_sets"]}
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MangroveError):
                raise
            raise TermFormatError(f"malformed fragment: {exc}") from None
        return cls(nodes, edges, pis, theta, a_sets, dict(doc.get("origin", {})))

    @classmethod
    def loads(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TermFormatError(f"fragment file is not JSON: {exc}") from None
        return cls.from_doc(doc)

    def without_edge(self, x, y):
        edges = [e for e in self.edges if e != (x, y)]
        pis = {k: v for k, v in self.pi_tables.items() if k != (x, y)}
        return Fragment(list(self.nodes), edges, pis, dict(self.theta_table),
                        self.a_sets, dict(self.origin))


def _fragment_orders(width, cap, per_block):
    bound = min(width, cap)
    out = []
    i = 0
    while OMEGA * i < bound:
        for j in range(per_block):
            o = OMEGA * i + j
            if o < bound:
                out.append(o)
        i += 1
        if i > 64:
            break
    return out


def extract_fragment(p, levels, max_order, max_nodes=4096, per_block=3) -> Fragment:
    """Nodes at the given levels with orders ``omega*i + j`` (j < per_block)."""
    cap = ord_(max_order)
    lv = sorted({ord_(a) for a in levels}, key=lambda a: a.key)
    nodes = []
    theta = {}
    for a in lv:
        if a == KAPPA:
            for base in p.blocks:
                for j in range(per_block):
                    tau = base + j
                    if p.f_inv(tau) < cap:
                        nodes.append(Node(KAPPA, tau))
            continue
        theta[a] = p.theta(a)
        nodes.extend(Node(a, o) for o in _fragment_orders(theta[a], cap, per_block))
        if len(nodes) > max_nodes:
            raise BudgetExceeded(f"more than {max_nodes} nodes")
    if len(nodes) > max_nodes:
        raise BudgetExceeded(f"more than {max_nodes} nodes")
    members = set(nodes)
    edges, pis = [], {}
    for y in nodes:
        for a in lv:
            if a >= y.level:
                break
            got = p.pred(y, a)
            if got is not None and Node(a, got[0]) in members:
                x = Node(a, got[0])
                edges.append((x, y))
                pis[(x, y)] = got[1]
    origin = {"lambda": fmt(p.lam), "blocks": [fmt(b) for b in p.blocks],
              "levels": [fmt(a) for a in lv], "max_order": fmt(cap),
              "per_block": per_block}
    return Fragment(nodes, edges, pis, theta, None, origin)


def check_fragment(frag: Fragment) -> Report:
    """Check every axiom instance whose quantifiers stay inside the fragment."""
    rep = Report.fresh("fragment", None, len(frag.nodes), FRAGMENT_AXIOMS)
    members = set(frag.nodes)
    below = {}
    for x, y in frag.edges:
        below.setdefault(y, []).append(x)
    rel = set(frag.edges)

    rec = rep.records["membership"]
    for x, y in frag.edges:
        rec.checked += 1
        if x not in members or y not in members:
            rec.fail({"edge": [x, y]}, "edge leaves the fragment")
    for n in frag.nodes:
        if n.level in frag.theta_table:
            rec.checked += 1
            if not n.order < frag.theta_table[n.level]:
                rec.fail({"node": n}, "order not below the level width")

    rec = rep.records["monotonicity"]
    for x, y in frag.edges:
        rec.checked += 1
        if not x.level < y.level:
            rec.fail({"edge": [x, y]}, "edge does not go up")

    rec = rep.records["tree_order"]
    for y, xs in below.items():
        levels = [x.level for x in xs]
        rec.checked += 1
        if len(set(levels)) != len(levels):
            rec.fail({"y": y}, "two predecessors on one level")
        xs = sorted(xs, key=lambda n: n.level.key)
        for i in range(len(xs)):
            for j in range(i + 1, len(xs)):
                rec.checked += 1
                if (xs[i], xs[j]) not in rel:
                    rec.fail({"y": y, "pair": [xs[i], xs[j]]},
                             "predecessors of y are not comparable")

    rec = rep.records["commutativity"]
    for (y, z) in frag.edges:
        for x in below.get(y, ()):
            if (x, z) not in rel:
                rec.fail({"x": x, "y": y, "z": z}, "relation is not transitive")
                continue
            rec.checked += 1
            if shift_compose(frag.pi_tables[(y, z)], frag.pi_tables[(x, y)]) != \
                    frag.pi_tables[(x, z)].normalized():
                rec.fail({"x": x, "y": y, "z": z}, "pi maps do not commute")

    rec = rep.records["M1"]
    for x, y in frag.edges:
        m = frag.pi_tables[(x, y)]
        rec.checked += 1
        if not check_sloop(m).ok or m.domain != x.order + 1 or m(x.order) != y.order:
            rec.fail({"x": x, "y": y, "map": m}, "map is not SLOOP onto o(y)")

    rec = rep.records["M2"]
    for x, y in frag.edges:
        m = frag.pi_tables[(x, y)]
        for w in frag.nodes:
            if w.level != x.level or not w.order < x.order:
                continue
            z = Node(y.level, m(w.order))
            if z not in members:
                rec.skipped += 1
                continue
            rec.checked += 1
            if (w, z) not in rel:
                rec.fail({"x": x, "y": y, "w": w, "z": z}, "w is not below z")
            elif frag.pi_tables[(w, z)].normalized() != m.restrict(w.order + 1):
                rec.fail({"x": x, "y": y, "w": w, "z": z}, "pi_wz is not a restriction")

    rec = rep.records["augmented"]
    if frag.a_sets is not None:
        for x, y in frag.edges:
            if x not in frag.a_sets or y not in frag.a_sets:
                rec.skipped += 1
                continue
            rec.checked += 1
            m = frag.pi_tables[(x, y)]
            pulled = sorted((g for g in _candidates(m, frag.a_sets[y])
                             if m(g) in set(frag.a_sets[y])), key=lambda g: g.key)
            if tuple(pulled) != tuple(frag.a_sets[x]):
                rec.fail({"x": x, "y": y}, "A_x is not the preimage of A_y")
        by_level = {}
        for n in frag.nodes:
            if n in frag.a_sets:
                by_level.setdefault(n.level, []).append(n)
        for group in by_level.values():
            group.sort(key=lambda n: n.order.key)
            for i in range(len(group) - 1):
                w, x = group[i], group[i + 1]
                rec.checked += 1
                cut = tuple(a for a in frag.a_sets[x] if a < w.order)
                if cut != tuple(frag.a_sets[w]):
                    rec.fail({"w": w, "x": x}, "A_w is not A_x cut at o(w)")
    return rep


def _candidates(m: PiecewiseShift, targets):
    out = []
    for t in targets:
        from .kord import shift_preimage
        g = shift_preimage(m, t)
        if g is not None:
            out.append(g)
    return out


def fragment_to_dot(frag: Fragment) -> str:
    """DOT export with one edge per immediate relation, pointing upwards."""
    lines = ["digraph fragment {", "  rankdir=BT;"]
    ids = {n: f"n{i}" for i, n in enumerate(frag.nodes)}
    for n in frag.nodes:
        lines.append(f'  {ids[n]} [label="({fmt(n.level)},{fmt(n.order)})"];')
    best = {}
    for x, y in frag.edges:
        if y not in best or best[y].level < x.level:
            best[y] = x
    for y in frag.nodes:
        if y in best:
            lines.append(f"  {ids[best[y]]} -> {ids[y]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
