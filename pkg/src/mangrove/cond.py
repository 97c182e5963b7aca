"""Morass conditions as constructor terms evaluated to a segment stack.

Every constructor output is normalized into the same shape.  Levels
``(0, lam]`` are cut into consecutive segments.  Inside a segment that starts
at ``s`` and has width ``g``, level ``s + b`` has width ``min(deg(b) + 1, g)``
and the tree is a bundle of vertical chains of constant order with identity
maps.  Chains may continue below ``s`` through *lanes*: a lane covers an
interval of orders in the segment and carries a bridge shift defined on the
width of level ``s``.  A node of order ``o`` in the lane sits above the node
``bridge^-1(o)`` at level ``s``, and the connecting map is the bridge
restricted to that node.  Level 0 has width 1; level kappa holds the block set
``S`` and is reached from the top level through the block enumeration ``f``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

from .errors import (
    AboveLambda,
    NotAligned,
    NotEquivalent,
    NotInCondition,
    NotLimit,
    NotRelated,
    OutOfDomain,
    Overlap,
    TermFormatError,
    TooWide,
    ZeroAlpha,
)
from .kord import (
    KAPPA,
    OMEGA,
    ONE,
    ZERO,
    Ord,
    PiecewiseShift,
    deg,
    div_omega_pow,
    fmt,
    iv_clip,
    iv_image,
    iv_norm,
    iv_preimage,
    left_sub,
    omega_pow,
    ord_,
    parse,
    shift_compose,
    shift_preimage,
)
from .verdict import proven, refuted

__all__ = [
    "Node", "Lane", "Segment", "BranchPiece", "Condition",
    "bamboo", "replace_s", "add_block", "tower_ext", "amalgam", "splice",
    "normalize_blocks", "from_doc", "loads", "dumps", "random_condition",
    "KAPPA",
]


class Node(NamedTuple):
    """A node ``<level, order>``; the level is ``KAPPA`` for top nodes."""

    level: Ord
    order: Ord

    @classmethod
    def of(cls, level, order):
        return cls(ord_(level), ord_(order))

    @property
    def at_kappa(self):
        return self.level == KAPPA

    def to_doc(self):
        return [fmt(self.level), fmt(self.order)]

    def __str__(self):
        return f"<{fmt(self.level)}, {fmt(self.order)}>"


@dataclass(frozen=True)
class Lane:
    lo: Ord
    hi: Ord
    bridge: PiecewiseShift

    def to_doc(self):
        return {"lo": fmt(self.lo), "hi": fmt(self.hi), "bridge": self.bridge.to_doc()}


@dataclass(frozen=True)
class Segment:
    """Levels ``(start, start + length]``; ``width`` is None only in truncations."""

    start: Ord
    width: Optional[Ord]
    length: Ord
    lanes: tuple

    @property
    def end(self):
        return self.start + self.length

    @property
    def cap(self):
        """Bound on the orders present in the segment."""
        if self.width is not None:
            return self.width
        return _lead(self.length) + 1

    def theta_at(self, beta):
        d = deg(beta) + 1
        return d if self.width is None or d < self.width else self.width

    def lane_for(self, order):
        for lane in self.lanes:
            if lane.lo <= order < lane.hi:
                return lane
        return None

    def to_doc(self):
        return {
            "start": fmt(self.start),
            "width": None if self.width is None else fmt(self.width),
            "length": fmt(self.length),
            "lanes": [lane.to_doc() for lane in self.lanes],
        }


@dataclass(frozen=True)
class BranchPiece:
    """Levels in ``(lo, hi]`` (or ``(lo, hi)``) carrying one order of a branch.

    ``lo`` is None for the piece made of level 0 alone.  A level in the range
    is on the branch exactly when its width exceeds ``order``; ``map`` is the
    map from such a node to the branch's top node.
    """

    lo: Optional[Ord]
    hi: Ord
    hi_inclusive: bool
    order: Ord
    map: PiecewiseShift

    def holds(self, level):
        if self.lo is None:
            return level == ZERO
        if level <= self.lo:
            return False
        return level <= self.hi if self.hi_inclusive else level < self.hi


def _lead(x: Ord) -> Ord:
    return x.lead_exp[1] if x.terms else ZERO


def _omega_times(n) -> Ord:
    return OMEGA * n


# segment normalization ---------------------------------------------------

def _clean_lanes(lanes, cap):
    out = []
    for lane in lanes:
        bridge = lane.bridge.normalized()
        hi = min(lane.hi, cap, bridge.image_end)
        if lane.lo < hi:
            out.append(Lane(lane.lo, hi, bridge))
    return tuple(out)


def _mergeable(a: Segment, b: Segment) -> bool:
    if a.width is None or len(b.lanes) != 1:
        return False
    if b.width is None:
        if not b.cap < a.width:
            return False
    elif b.width != a.width:
        return False
    lane = b.lanes[0]
    return (lane.lo == ZERO and lane.hi == b.cap
            and lane.bridge == PiecewiseShift.identity(a.width))


def _normalize(segments):
    out = []
    for seg in segments:
        seg = Segment(seg.start, seg.width, seg.length, _clean_lanes(seg.lanes, seg.cap))
        if out and _mergeable(out[-1], seg):
            prev = out.pop()
            seg = Segment(prev.start, prev.width, prev.length + seg.length, prev.lanes)
        out.append(seg)
    return tuple(out)


def _truncate(segments, mu):
    out = []
    for seg in segments:
        if seg.end <= mu:
            out.append(seg)
            continue
        if seg.start < mu:
            beta = left_sub(seg.start, mu)
            if beta >= omega_pow(seg.width):
                out.append(Segment(seg.start, seg.width, beta, seg.lanes))
            else:
                out.append(Segment(seg.start, None, beta, seg.lanes))
        break
    return _normalize(out)


def normalize_blocks(bases) -> tuple:
    """Validate a block-base list: strictly increasing limits, starting at 0."""
    out = tuple(ord_(b) for b in bases)
    if not out or out[0] != ZERO:
        raise TermFormatError("a block set must start with the base 0")
    for b in out:
        if not b.limit_or_zero:
            raise NotLimit(f"block base {fmt(b)} is not a limit")
    for a, b in zip(out, out[1:]):
        if not a < b:
            raise TermFormatError("block bases must strictly increase")
    return out


# the condition ------------------------------------------------------------

class Condition:
    """A closed constructor term together with its evaluated segment stack."""

    def __init__(self, kind, args, segments, blocks):
        self.kind = kind
        self.args = args
        self.segments = _normalize(segments)
        self.blocks = tuple(blocks)
        self._ends = [seg.end for seg in self.segments]

    # identity -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Condition):
            return NotImplemented
        return self.segments == other.segments and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.segments, self.blocks))

    def __repr__(self):
        return f"Condition({self.kind}, lam={fmt(self.lam)}, blocks={[fmt(b) for b in self.blocks]})"

    @property
    def lam(self) -> Ord:
        return self._ends[-1]

    @property
    def ot(self) -> Ord:
        return _omega_times(len(self.blocks))

    @cached_property
    def top_width(self) -> Ord:
        return self.segments[-1].width

    @cached_property
    def depth(self) -> int:
        kids = [a for a in self.args if isinstance(a, Condition)]
        return 1 + max((k.depth for k in kids), default=0)

    def descriptor(self, mu=None):
        """Segment stack, truncated at level ``mu`` when given."""
        if mu is None:
            return self.segments
        mu = ord_(mu)
        if mu > self.lam:
            raise AboveLambda(f"{fmt(mu)} is above lambda {fmt(self.lam)}")
        return _truncate(self.segments, mu)

    # levels -------------------------------------------------------------

    def segment_index(self, level) -> int:
        """Index of the segment with ``start < level <= end`` (level > 0)."""
        lo, hi = 0, len(self._ends) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self._ends[mid] < level:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def _check_level(self, alpha):
        alpha = ord_(alpha)
        if not alpha.kappa_free:
            raise AboveLambda("kappa is not a level below lambda")
        if alpha > self.lam:
            raise AboveLambda(f"{fmt(alpha)} is above lambda {fmt(self.lam)}")
        return alpha

    def theta(self, alpha) -> Ord:
        alpha = self._check_level(alpha)
        if not alpha:
            return ONE
        seg = self.segments[self.segment_index(alpha)]
        return seg.theta_at(left_sub(seg.start, alpha))

    def boundaries(self):
        return list(self._ends)

    # top level ----------------------------------------------------------

    @cached_property
    def f(self) -> PiecewiseShift:
        pieces = [(_omega_times(i), b) for i, b in enumerate(self.blocks)]
        return PiecewiseShift.from_pieces(self.ot, pieces)

    def f_apply(self, nu) -> Ord:
        nu = ord_(nu)
        if nu >= self.ot:
            raise OutOfDomain(f"{fmt(nu)} is not below ot(S) = {fmt(self.ot)}")
        return self.f(nu)

    def f_inv(self, tau) -> Optional[Ord]:
        return shift_preimage(self.f, ord_(tau))

    def in_s(self, tau) -> bool:
        return self.f_inv(tau) is not None

    # nodes and the tree ---------------------------------------------------

    def contains(self, x) -> bool:
        level, order = ord_(x[0]), ord_(x[1])
        if level == KAPPA:
            return self.in_s(order)
        if not level.kappa_free or level > self.lam:
            return False
        return order < self.theta(level)

    def _require(self, x):
        x = Node.of(*x)
        if not self.contains(x):
            raise NotInCondition(f"{x} is not a node of the condition")
        return x

    def pred(self, y, alpha):
        """The node below ``y`` at level ``alpha`` and its map, or None.

        Returns ``(order, map)`` where map goes from ``<alpha, order>`` to y.
        """
        level, order = ord_(y[0]), ord_(y[1])
        alpha = ord_(alpha)
        if alpha > level:
            return None
        acc = PiecewiseShift.identity(order + 1)
        if alpha == level:
            return order, acc
        if level == KAPPA:
            nu = self.f_inv(order)
            if nu is None:
                return None
            acc = self.f.restrict(nu + 1)
            level, order = self.lam, nu
            if nu >= self.theta(self.lam):
                return None
        while alpha < level:
            seg = self.segments[self.segment_index(level)]
            if alpha > seg.start:
                return (order, acc) if self.theta(alpha) > order else None
            lane = seg.lane_for(order)
            if lane is None:
                return None
            x = shift_preimage(lane.bridge, order)
            if x is None:
                return None
            acc = shift_compose(acc, lane.bridge.restrict(x + 1))
            level, order = seg.start, x
        return order, acc

    def tree_rel(self, x, y) -> bool:
        x, y = self._require(x), self._require(y)
        if not x.level < y.level:
            return False
        got = self.pred(y, x.level)
        return got is not None and got[0] == x.order

    def pi_map(self, x, y) -> PiecewiseShift:
        x, y = self._require(x), self._require(y)
        got = self.pred(y, x.level) if x.level < y.level else None
        if got is None or got[0] != x.order:
            raise NotRelated(f"{x} is not below {y}")
        return got[1]

    def branch_pieces(self, y):
        y = self._require(y)
        level, order = y
        acc = PiecewiseShift.identity(order + 1)
        inclusive = False
        if level == KAPPA:
            nu = self.f_inv(order)
            acc = self.f.restrict(nu + 1)
            level, order = self.lam, nu
            inclusive = True
            if nu >= self.theta(self.lam):
                return []
        pieces = []
        descended = inclusive
        while level > ZERO:
            seg = self.segments[self.segment_index(level)]
            if seg.start < level or inclusive:
                pieces.append(BranchPiece(seg.start, level, inclusive, order, acc))
            lane = seg.lane_for(order)
            x = shift_preimage(lane.bridge, order) if lane else None
            if x is None:
                return pieces
            acc = shift_compose(acc, lane.bridge.restrict(x + 1))
            level, order = seg.start, x
            inclusive = descended = True
        if descended:
            pieces.append(BranchPiece(None, ZERO, True, order, acc))
        return pieces

    def immediate_pred(self, y) -> Optional[Node]:
        """The node directly below y on its branch, if the branch has a top."""
        y = self._require(y)
        if y.at_kappa:
            nu = self.f_inv(y.order)
            return Node(self.lam, nu) if nu < self.theta(self.lam) else None
        if not y.level:
            return None
        seg = self.segments[self.segment_index(y.level)]
        beta = left_sub(seg.start, y.level)
        q, r = div_omega_pow(beta, y.order)
        unit = omega_pow(y.order)
        if r:
            below = q
        elif q.is_successor:
            below = q.pred()
        else:
            return None
        if below:
            return Node(seg.start + unit * below, y.order)
        lane = seg.lane_for(y.order)
        x = shift_preimage(lane.bridge, y.order) if lane else None
        return None if x is None else Node(seg.start, x)

    def descending_orders(self, level, alpha):
        """Orders at ``level`` whose node has a predecessor at ``alpha``."""
        level, alpha = self._check_level(level), self._check_level(alpha)
        top = self.theta(level)
        if alpha >= level:
            return iv_norm([(ZERO, top)]) if alpha == level else ()
        seg = self.segments[self.segment_index(level)]
        if alpha > seg.start:
            return iv_norm([(ZERO, min(top, self.theta(alpha)))])
        lower = self.descending_orders(seg.start, alpha)
        out = []
        for lane in seg.lanes:
            out.extend(iv_clip(iv_image(lane.bridge, lower), lane.lo, lane.hi))
        return iv_clip(out, ZERO, top)

    def kappa_reach(self, alpha):
        """Orders at level ``alpha`` whose node lies below some kappa node."""
        alpha = self._check_level(alpha)
        ivs = iv_norm([(ZERO, min(self.ot, self.theta(self.lam)))])
        for seg in reversed(self.segments):
            if seg.start < alpha:
                return iv_clip(ivs, ZERO, self.theta(alpha))
            nxt = []
            for lane in seg.lanes:
                nxt.extend(iv_preimage(lane.bridge, iv_clip(ivs, lane.lo, lane.hi)))
            ivs = iv_norm(nxt)
        return iv_clip(ivs, ZERO, ONE)

    # mangals ------------------------------------------------------------

    def mangal_status(self, alpha, budget=None, seed=None):
        """Exact mangal test; the optional budget and seed are unused."""
        alpha = self._check_level(alpha)
        if not alpha:
            return proven("level 0")
        seg = self.segments[self.segment_index(alpha)]
        if alpha == seg.end:
            return proven("segment boundary")
        beta = left_sub(seg.start, alpha)
        d = deg(beta)
        if d >= seg.width:
            return proven("close-off level of full width")
        step = omega_pow(d + 1)
        q, _ = div_omega_pow(beta, d + 1)
        if q:
            x = Node(seg.start + step * q, d + 1)
            y = Node(seg.start + step * (q + 1), d + 1)
            return refuted((x, y), f"chain of order {fmt(d + 1)} skips level {fmt(alpha)}")
        for lane in seg.lanes:
            for s, d_lo, span_end in _bridge_spans(lane.bridge):
                o = max(d_lo, lane.lo, d + 1)
                if o < min(span_end, lane.hi, seg.width):
                    x = Node(seg.start, s + left_sub(d_lo, o))
                    y = Node(seg.start + omega_pow(o), o)
                    return refuted((x, y), f"lane order {fmt(o)} skips level {fmt(alpha)}")
        return proven("no chain can cross this level")

    # serialization ------------------------------------------------------

    def to_doc(self):
        doc = {"kind": self.kind}
        if self.kind == "replace_s":
            doc["parent"] = self.args[0].to_doc()
            doc["blocks"] = [fmt(b) for b in self.args[1]]
        elif self.kind == "add_block":
            doc["parent"] = self.args[0].to_doc()
            doc["sigma"] = fmt(self.args[1])
        elif self.kind == "tower_ext":
            doc["parent"] = self.args[0].to_doc()
            doc["alpha"] = fmt(self.args[1])
        elif self.kind == "amalgam":
            doc["left"] = self.args[0].to_doc()
            doc["right"] = self.args[1].to_doc()
        elif self.kind == "splice":
            doc["upper"] = self.args[0].to_doc()
            doc["old_lower"] = self.args[1].to_doc()
            doc["new_lower"] = self.args[2].to_doc()
        return doc

    def profile_doc(self):
        """Evaluated shape, independent of how the term was written."""
        return {
            "lambda": fmt(self.lam),
            "blocks": [fmt(b) for b in self.blocks],
            "segments": [seg.to_doc() for seg in self.segments],
        }


def _bridge_spans(m: PiecewiseShift):
    """Yield ``(src, dst, dst_end)`` per piece."""
    for i, (s, d) in enumerate(m.pieces):
        e = m.pieces[i + 1][0] if i + 1 < len(m.pieces) else m.domain
        if s < e:
            yield s, d, d + left_sub(s, e)


# constructors ---------------------------------------------------------------

def bamboo() -> Condition:
    lane = Lane(ZERO, OMEGA, PiecewiseShift.identity(ONE))
    seg = Segment(ZERO, OMEGA, omega_pow(OMEGA), (lane,))
    return Condition("bamboo", (), (seg,), (ZERO,))


def replace_s(p: Condition, blocks) -> Condition:
    blocks = normalize_blocks(blocks)
    top = p.theta(p.lam)
    if _omega_times(len(blocks)) > top:
        raise TooWide(f"ot = {fmt(_omega_times(len(blocks)))} exceeds the top width {fmt(top)}")
    return Condition("replace_s", (p, blocks), p.segments, blocks)


def add_block(p: Condition, sigma) -> Condition:
    sigma = ord_(sigma)
    if not sigma.limit_or_zero:
        raise NotLimit(f"{fmt(sigma)} is not a limit")
    if sigma in p.blocks:
        return p
    below = sum(1 for b in p.blocks if b < sigma)
    tbar = _omega_times(below)
    xi = left_sub(tbar, p.ot)
    width = tbar + OMEGA + xi
    top = p.theta(p.lam)
    lanes = (
        Lane(ZERO, tbar + 1, PiecewiseShift.identity(top)),
        Lane(tbar + OMEGA, width,
             PiecewiseShift.from_pieces(top, [(ZERO, ZERO), (tbar, tbar + OMEGA)])),
    )
    seg = Segment(p.lam, width, omega_pow(width), lanes)
    blocks = tuple(sorted(p.blocks + (sigma,), key=lambda b: b.key))
    return Condition("add_block", (p, sigma), p.segments + (seg,), blocks)


def tower_ext(p: Condition, alpha) -> Condition:
    alpha = ord_(alpha)
    if not alpha:
        raise ZeroAlpha("the tower coefficient must be at least 1")
    if not alpha.kappa_free:
        raise NotLimit("the tower coefficient must lie below kappa")
    width = p.ot
    lane = Lane(ZERO, width, PiecewiseShift.identity(p.theta(p.lam)))
    seg = Segment(p.lam, width, omega_pow(width) * alpha, (lane,))
    return Condition("tower_ext", (p, alpha), p.segments + (seg,), p.blocks)


def amalgam(p: Condition, q: Condition) -> Condition:
    if p.lam != q.lam or p.theta(p.lam) != q.theta(q.lam):
        raise NotAligned("amalgam needs equal lambda and equal top width")
    if p.segments != q.segments:
        raise NotEquivalent("the inputs differ below their common lambda")
    common = 0
    while (common < min(len(p.blocks), len(q.blocks))
           and p.blocks[common] == q.blocks[common]):
        common += 1
    p_tail, q_tail = p.blocks[common:], q.blocks[common:]
    if not p_tail or not q_tail:
        raise Overlap("both inputs need blocks beyond their common part")
    sup_p = p.blocks[-1] + OMEGA
    if q_tail[0] < sup_p:
        raise Overlap(f"the right tail starts at {fmt(q_tail[0])}, below sup S = {fmt(sup_p)}")
    g0, gp = _omega_times(common), p.ot
    width = gp + _omega_times(len(q_tail))
    top = p.theta(p.lam)
    lanes = (
        Lane(ZERO, gp, PiecewiseShift.identity(top)),
        Lane(gp, width, PiecewiseShift.from_pieces(top, [(ZERO, ZERO), (g0, gp)])),
    )
    seg = Segment(p.lam, width, omega_pow(width), lanes)
    return Condition("amalgam", (p, q), p.segments + (seg,), p.blocks + q_tail)


def splice(upper: Condition, old: Condition, new: Condition) -> Condition:
    mu = old.lam
    if new.lam != mu or mu > upper.lam:
        raise NotAligned("splice needs equal lower lambdas, not above the upper one")
    if old.theta(mu) != new.theta(mu):
        raise NotAligned("splice needs equal widths at the lower lambda")
    if upper.descriptor(mu) != old.segments or not upper.mangal_status(mu).proven:
        raise NotEquivalent("the upper condition does not agree with the old lower part")
    rest = []
    for seg in upper.segments:
        if seg.end <= mu:
            continue
        if seg.start < mu:
            width = seg.width
            lane = Lane(ZERO, width, PiecewiseShift.identity(width))
            seg = Segment(mu, width, left_sub(left_sub(seg.start, mu), seg.length), (lane,))
        rest.append(seg)
    return Condition("splice", (upper, old, new), new.segments + tuple(rest), upper.blocks)


# term documents -------------------------------------------------------------

_FIELDS = {
    "bamboo": (),
    "replace_s": ("parent", "blocks"),
    "add_block": ("parent", "sigma"),
    "tower_ext": ("parent", "alpha"),
    "amalgam": ("left", "right"),
    "splice": ("upper", "old_lower", "new_lower"),
}


def from_doc(doc) -> Condition:
    if not isinstance(doc, dict) or doc.get("kind") not in _FIELDS:
        raise TermFormatError(f"not a term: {doc!r:.80}")
    kind = doc["kind"]
    expected = set(_FIELDS[kind]) | {"kind"}
    if set(doc) != expected:
        raise TermFormatError(f"{kind} takes fields {sorted(expected)}, got {sorted(doc)}")
    if kind == "bamboo":
        return bamboo()
    if kind == "replace_s":
        if not isinstance(doc["blocks"], list):
            raise TermFormatError("blocks must be a list")
        return replace_s(from_doc(doc["parent"]), [_ord_field(b) for b in doc["blocks"]])
    if kind == "add_block":
        return add_block(from_doc(doc["parent"]), _ord_field(doc["sigma"]))
    if kind == "tower_ext":
        return tower_ext(from_doc(doc["parent"]), _ord_field(doc["alpha"]))
    if kind == "amalgam":
        return amalgam(from_doc(doc["left"]), from_doc(doc["right"]))
    return splice(from_doc(doc["upper"]), from_doc(doc["old_lower"]), from_doc(doc["new_lower"]))


def _ord_field(text):
    if not isinstance(text, str):
        raise TermFormatError(f"ordinal fields are strings, got {text!r}")
    return parse(text)


def dumps(p: Condition) -> str:
    return json.dumps(p.to_doc(), sort_keys=True, indent=2) + "\n"


def loads(text: str) -> Condition:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TermFormatError(f"invalid JSON: {exc}") from exc
    return from_doc(doc)


# random terms ---------------------------------------------------------------

def _random_base(rng: random.Random, p: Condition) -> Ord:
    roll = rng.random()
    if roll < 0.6:
        return OMEGA * rng.randint(1, 24)
    if roll < 0.85:
        return omega_pow(2) * rng.randint(1, 3) + OMEGA * rng.randint(0, 5)
    return KAPPA * rng.randint(1, 2) + OMEGA * rng.randint(0, 3)


def random_condition(rng: random.Random, depth=6) -> Condition:
    """Random constructor term with at most ``depth`` constructor layers."""
    p = bamboo()
    for _ in range(rng.randint(0, depth - 1)):
        roll = rng.random()
        if roll < 0.4:
            p = add_block(p, _random_base(rng, p))
        elif roll < 0.6:
            p = tower_ext(p, rng.choice([ONE, ONE, Ord(2), Ord(3), OMEGA, OMEGA + 1]))
        elif roll < 0.75:
            room = _width_count(p)
            count = rng.randint(1, max(1, min(room, len(p.blocks) + 1)))
            bases = sorted({ZERO} | {_random_base(rng, p) for _ in range(count - 1)}, key=lambda b: b.key)
            p = replace_s(p, bases[:room])
        elif roll < 0.9 and len(p.blocks) < _width_count(p):
            fresh = p.blocks[-1] + OMEGA * rng.randint(1, 6)
            q = replace_s(p, p.blocks[:-1] + (fresh,)) if len(p.blocks) > 1 else replace_s(p, (ZERO, fresh))
            try:
                p = amalgam(p, q)
            except (Overlap, NotAligned, NotEquivalent):
                p = add_block(p, fresh)
        else:
            old = p
            upper = tower_ext(add_block(p, p.blocks[-1] + OMEGA * rng.randint(1, 4)), 1)
            new = replace_s(old, old.blocks[:1]) if rng.random() < 0.5 else old
            p = splice(upper, old, new)
    return p


def _width_count(p: Condition) -> int:
    """Number of omega-blocks the top width can hold (width is omega*n)."""
    top = p.theta(p.lam)
    if top.lead_exp == (0, ONE):
        return top.terms[0][1]
    return len(p.blocks)
