"""The morass code of a condition: level sums, node enumerations, code bits.

Positions are limit ordinals ``omega * A``.  Writing ``A`` in base kappa
(``A = kappa^3 * c3 + kappa^2 * c2 + kappa * c1 + c0``) selects the clause:

* ``A = kappa*alpha + zeta``: width row of level ``alpha``;
* ``A = kappa^2 + kappa*alpha + zeta``: tree bit between nodes ``m(alpha)``, ``m(zeta)``;
* ``A = kappa^2*(2+alpha) + kappa*zeta + eta``: map bit for the same pair;
* ``A = kappa^3 + kappa*b + alpha``: kappa-link bit for ``n(alpha)`` and the pair
  ``(tau, nu)`` with max-lex index ``b``.

Everything else is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .cond import Condition, Node
from .errors import (
    AboveLambda,
    InconsistentCode,
    NotCovered,
    OutOfRange,
)
from .kord import (
    KAPPA,
    OMEGA,
    ONE,
    ZERO,
    Ord,
    deg,
    div_omega_pow,
    fmt,
    godel_pair,
    godel_unpair,
    greatest_below,
    iv_covers,
    left_sub,
    ord_,
    shift_preimage,
    wpow,
)
from .verdict import Verdict, proven, refuted

__all__ = [
    "CodePoint", "is_determined_mangal", "determined_levels_in", "next_determined",
    "iota", "delta_sum", "m_enum", "n_enum", "m_index", "n_index",
    "theta_position", "tree_position", "pi_position", "kappa_position",
    "split_position", "code_at", "code_dump", "positions_in_range",
    "Skeleton", "DecodedWindow", "decode_window", "Reconstruction",
    "reconstruct_determined_level",
]

KAPPA2 = wpow((2, ZERO))
KAPPA3 = wpow((3, ZERO))


# base-kappa digits ------------------------------------------------------------

def _digits(a: Ord) -> dict:
    """kappa-free digits c_k with a = sum kappa^k * c_k."""
    out = {}
    for (k, e), n in a.terms:
        out.setdefault(k, []).append(((0, e), n))
    return {k: Ord._make(tuple(ts)) for k, ts in out.items()}


def _from_digits(digits: dict) -> Ord:
    terms = []
    for k in sorted(digits, reverse=True):
        terms.extend(((k, e), n) for (_, e), n in digits[k].terms)
    return Ord._make(tuple(terms))


def _kappa_times(a: Ord) -> Ord:
    return Ord._make(tuple(((k + 1, e), n) for (k, e), n in a.terms))


def _kappa_div(a: Ord):
    """(q, r) with a = kappa*q + r and r < kappa."""
    q = tuple(((k - 1, e), n) for (k, e), n in a.terms if k)
    r = tuple(t for t in a.terms if not t[0][0])
    return Ord._make(q), Ord._make(r)


def _omega_times(a: Ord) -> Ord:
    return OMEGA * a


def _div_omega(position: Ord) -> Ord:
    """The A with omega*A = position; position must be 0 or a limit."""
    terms = []
    for (k, e), n in position.terms:
        if k == 0 and not e:
            raise OutOfRange(f"{fmt(position)} is not a limit")
        if k == 0 and e.is_nat:
            terms.append(((0, e.pred()), n))
        else:
            terms.append(((k, e), n))
    return Ord._make(tuple(terms))


# determined mangals ----------------------------------------------------------

@lru_cache(maxsize=256)
def _determined_segments(p: Condition) -> frozenset:
    """Indices of segments whose close-off levels are determined mangals."""
    out = set()
    for i, seg in enumerate(p.segments):
        w = seg.width
        if w is None or not w.is_limit:
            continue
        if iv_covers(p.kappa_reach(seg.end), ZERO, w):
            out.add(i)
    return frozenset(out)


def _is_det(p: Condition, level) -> bool:
    if not level:
        return False
    i = p.segment_index(level)
    if i not in _determined_segments(p):
        return False
    seg = p.segments[i]
    return deg(left_sub(seg.start, level)) >= seg.width


def is_determined_mangal(p: Condition, beta) -> Verdict:
    beta = ord_(beta)
    if beta > p.lam:
        raise AboveLambda(f"{fmt(beta)} is above lambda {fmt(p.lam)}")
    st = p.mangal_status(beta)
    if st.refuted:
        return refuted({"crossing": st.witness}, "not a mangal")
    width = p.theta(beta)
    if not width.is_limit:
        return refuted({"theta": width}, "the width is not a limit")
    reach = p.kappa_reach(beta)
    if not iv_covers(reach, ZERO, width):
        gap = ZERO
        for lo, hi in reach:
            if lo > gap:
                break
            gap = hi
        return refuted({"node": Node(beta, gap)}, "a node at this level reaches no kappa node")
    return proven("limit width and every node reaches level kappa")


def next_determined(p: Condition, level) -> Optional[Ord]:
    """Least determined mangal strictly above ``level``, or None."""
    level = ord_(level)
    det = _determined_segments(p)
    for i, seg in enumerate(p.segments):
        if seg.end <= level or i not in det:
            continue
        unit = wpow((0, seg.width))
        if level < seg.start:
            cand = seg.start + unit
        else:
            q, _ = div_omega_pow(left_sub(seg.start, level), seg.width)
            cand = seg.start + unit * (q + 1)
        if cand <= seg.end:
            return cand
    return None


def determined_levels_in(p: Condition, levels):
    return [a for a in levels if _is_det(p, ord_(a))]


# level sums -------------------------------------------------------------------

def _level_sum(p: Condition, gamma, skip_determined: bool) -> Ord:
    gamma = ord_(gamma)
    if gamma > p.lam + 1:
        raise AboveLambda(f"{fmt(gamma)} exceeds lambda + 1")
    if not gamma:
        return ZERO
    total = ONE
    for seg in p.segments:
        if gamma <= seg.start:
            break
        x = left_sub(seg.start, gamma)
        if x > seg.length + 1:
            x = seg.length + 1
        prefix = ZERO
        for (_, e), n in x.terms:
            if prefix:
                lvl = seg.start + prefix
                if not (skip_determined and _is_det(p, lvl)):
                    total = total + p.theta(lvl)
            # later chunks of the same term are absorbed into omega^e * n
            total = total + (wpow((0, e), n) if e else Ord(n - 1))
            prefix = prefix + wpow((0, e), n)
    return total


def iota(p: Condition, gamma) -> Ord:
    """Sum of the widths of the levels below gamma."""
    return _level_sum(p, gamma, False)


def delta_sum(p: Condition, gamma) -> Ord:
    """Like iota, leaving out determined mangals."""
    return _level_sum(p, gamma, True)


def _enum(p, alpha, summer, skip):
    alpha = ord_(alpha)
    top = p.lam + 1
    if alpha >= summer(p, top):
        raise OutOfRange(f"index {fmt(alpha)} is beyond the enumerated nodes")
    level = greatest_below(lambda x: x <= top and summer(p, x) <= alpha, top)
    node = Node(level, left_sub(summer(p, level), alpha))
    assert not (skip and _is_det(p, level))
    return node


def m_enum(p: Condition, alpha) -> Node:
    """The alpha-th node of p in (level, order) order."""
    return _enum(p, alpha, iota, False)


def n_enum(p: Condition, alpha) -> Node:
    """The alpha-th node of p on a level that is not a determined mangal."""
    return _enum(p, alpha, delta_sum, True)


def m_index(p: Condition, x) -> Ord:
    x = Node.of(*x)
    if not p.contains(x) or x.at_kappa:
        raise OutOfRange(f"{x} is not a node below level kappa")
    return iota(p, x.level) + x.order


def n_index(p: Condition, x) -> Ord:
    x = Node.of(*x)
    if not p.contains(x) or x.at_kappa or _is_det(p, x.level):
        raise OutOfRange(f"{x} is not enumerated by n")
    return delta_sum(p, x.level) + x.order


# positions --------------------------------------------------------------------

def theta_position(level, zeta) -> Ord:
    return _omega_times(_kappa_times(ord_(level)) + ord_(zeta))


def tree_position(alpha, zeta) -> Ord:
    return _omega_times(KAPPA2 + _kappa_times(ord_(alpha)) + ord_(zeta))


def pi_position(alpha, zeta, eta) -> Ord:
    return _omega_times(_from_digits({2: Ord(2) + ord_(alpha), 1: ord_(zeta), 0: ord_(eta)}))


def kappa_position(tau, nu, alpha) -> Ord:
    return _omega_times(KAPPA3 + _kappa_times(godel_pair(tau, nu)) + ord_(alpha))


def split_position(position):
    """Return ``(clause, params)``; clause 5 means the position is never coded."""
    position = ord_(position)
    if position.terms and not position.is_limit:
        return 5, {}
    a = _div_omega(position)
    if a >= KAPPA3:
        b, alpha = _kappa_div(left_sub(KAPPA3, a))
        tau, nu = godel_unpair(b)
        return 4, {"tau": tau, "nu": nu, "alpha": alpha}
    d = _digits(a)
    c2, c1, c0 = d.get(2, ZERO), d.get(1, ZERO), d.get(0, ZERO)
    if not c2:
        return 1, {"level": c1, "zeta": c0}
    if c2 == ONE:
        return 2, {"alpha": c1, "zeta": c0}
    return 3, {"alpha": left_sub(Ord(2), c2), "zeta": c1, "eta": c0}


@dataclass(frozen=True)
class CodePoint:
    position: Ord
    value: Optional[int]
    clause: int

    def to_doc(self):
        return {"position": fmt(self.position), "clause": self.clause,
                "value": "U" if self.value is None else self.value}


def _image_has(m, v) -> bool:
    return shift_preimage(m, v) is not None


def _pair_bits(p, alpha, zeta):
    """(defined, related, map) for the tree and map rows of m(alpha)."""
    if alpha >= iota(p, p.lam):
        return False, None, None
    x = m_enum(p, alpha)
    mu = next_determined(p, x.level)
    bound = iota(p, p.lam + 1 if mu is None else mu)
    if zeta >= bound:
        return (mu is not None), None, None
    y = m_enum(p, zeta)
    if not x.level < y.level:
        return True, False, None
    got = p.pred(y, x.level)
    if got is None or got[0] != x.order:
        return True, False, None
    return True, True, got[1]


def code_at(p: Condition, position) -> CodePoint:
    position = ord_(position)
    try:
        clause, par = split_position(position)
    except OutOfRange:
        return CodePoint(position, None, 5)
    if clause == 5:
        return CodePoint(position, None, 5)
    if clause == 1:
        level, zeta = par["level"], par["zeta"]
        if level > p.lam:
            return CodePoint(position, None, 5)
        if _is_det(p, level):
            return CodePoint(position, 0, 1)
        return CodePoint(position, int(zeta < p.theta(level)), 1)
    if clause in (2, 3):
        defined, related, m = _pair_bits(p, par["alpha"], par["zeta"])
        if not defined:
            return CodePoint(position, None, 5)
        if clause == 2:
            return CodePoint(position, int(bool(related)), 2)
        return CodePoint(position, int(bool(related) and _image_has(m, par["eta"])), 3)
    tau, nu, alpha = par["tau"], par["nu"], par["alpha"]
    if not p.in_s(tau) or alpha >= delta_sum(p, p.lam + 1):
        return CodePoint(position, None, 5)
    x = n_enum(p, alpha)
    got = p.pred(Node(KAPPA, tau), x.level)
    if got is None or got[0] != x.order:
        return CodePoint(position, 0, 4)
    return CodePoint(position, int(_image_has(got[1], nu)), 4)


def positions_in_range(lo, hi, limit=100000):
    """The limit positions omega*A with lo <= omega*A < hi."""
    lo, hi = ord_(lo), ord_(hi)

    def first_at_least(x):
        a = _div_omega(x.limit_part) if x.limit_part else ZERO
        return a + 1 if x.finite_part else a

    a_lo, a_hi = first_at_least(lo), first_at_least(hi)
    if a_hi <= a_lo:
        return []
    span = left_sub(a_lo, a_hi)
    if not span.is_nat or int(span) > limit:
        raise OutOfRange(f"range {fmt(lo)}..{fmt(hi)} holds more than {limit} positions")
    return [_omega_times(a_lo + i) for i in range(int(span))]


def code_dump(p: Condition, positions, show_undefined=False) -> str:
    lines = []
    for pos in sorted({ord_(x) for x in positions}, key=lambda o: o.key):
        cp = code_at(p, pos)
        if cp.value is None:
            if show_undefined:
                lines.append(f"{fmt(pos)}\tU")
            continue
        lines.append(f"{fmt(pos)}\t{cp.value}")
    return "".join(line + "\n" for line in lines)


# decoding ---------------------------------------------------------------------

class Skeleton:
    """The node enumerations a window is decoded against."""

    def __init__(self, m, n):
        self.m = m
        self.n = n

    @classmethod
    def of(cls, p: Condition):
        return cls(lambda a: m_enum(p, a), lambda a: n_enum(p, a))


@dataclass
class DecodedWindow:
    theta: dict = field(default_factory=dict)
    theta_at_least: dict = field(default_factory=dict)
    determined: set = field(default_factory=set)
    tree: dict = field(default_factory=dict)
    pi: dict = field(default_factory=dict)
    kappa: dict = field(default_factory=dict)

    def is_empty(self):
        return not (self.theta or self.theta_at_least or self.determined
                    or self.tree or self.pi or self.kappa)


def decode_window(code, window, skeleton: Skeleton) -> DecodedWindow:
    """Turn the code bits at the window positions back into condition facts.

    ``code`` maps a position to a CodePoint (for instance
    ``lambda x: code_at(p, x)``).  Undefined positions assert nothing.
    """
    out = DecodedWindow()
    rows, tree_pos, pi_rows = {}, {}, {}
    for pos in sorted({ord_(x) for x in window}, key=lambda o: o.key):
        cp = code(pos)
        if cp.value is None:
            continue
        clause, par = split_position(pos)
        if clause == 1:
            rows.setdefault(par["level"], []).append((par["zeta"], cp.value, pos))
        elif clause == 2:
            x, y = skeleton.m(par["alpha"]), skeleton.m(par["zeta"])
            out.tree[(x, y)] = bool(cp.value)
            tree_pos[(x, y)] = pos
        elif clause == 3:
            x, y = skeleton.m(par["alpha"]), skeleton.m(par["zeta"])
            out.pi[(x, y, par["eta"])] = bool(cp.value)
            if cp.value:
                pi_rows.setdefault((x, y), []).append(pos)
        else:
            x = skeleton.n(par["alpha"])
            out.kappa[(x, par["tau"], par["nu"])] = bool(cp.value)
    for level, bits in rows.items():
        bits.sort(key=lambda t: t[0].key)
        zero_at = [z for z, v, _ in bits if not v]
        ones = [z for z, v, _ in bits if v]
        if zero_at and ones and max(ones) > min(zero_at):
            bad = [pos for z, v, pos in bits if (v and z > min(zero_at)) or z == min(zero_at)]
            raise InconsistentCode(f"width row of level {fmt(level)} is not an initial run",
                                   bad)
        if zero_at and zero_at[0] == ZERO:
            out.determined.add(level)
            continue
        prefix = ZERO
        for z, v, _ in bits:
            if z != prefix or not v:
                break
            prefix = prefix + 1
        if zero_at and prefix == min(zero_at):
            out.theta[level] = prefix
        elif prefix:
            out.theta_at_least[level] = prefix
    for key, positions in pi_rows.items():
        if out.tree.get(key) is False:
            raise InconsistentCode(f"map bits set for unrelated nodes {key[0]}, {key[1]}",
                                   positions + [tree_pos[key]])
    return out


# reconstruction -------------------------------------------------------------

@dataclass
class Reconstruction:
    """Level data recovered for a determined mangal from the rest of a fragment.

    Classes of kappa targets are listed by least element; class ``k`` stands
    for the k-th node of the level.  ``maps[(k, tau)][j]`` is the value at the
    order of node ``j`` of the map from node ``k`` to ``<kappa, tau>``.
    """

    level: Ord
    classes: list
    lower_edges: dict
    maps: dict

    @property
    def theta(self):
        return len(self.classes)


def reconstruct_determined_level(frag, beta) -> Reconstruction:
    beta = ord_(beta)
    lower = [n for n in frag.nodes if n.level != KAPPA and n.level < beta]
    if not lower:
        raise NotCovered(f"the fragment has no nodes below {fmt(beta)}")
    kappa_edges = {}
    for x, y in frag.edges:
        if y.level == KAPPA and x.level != KAPPA and x.level < beta:
            kappa_edges.setdefault(y.order, set()).add(x)
    targets = sorted(kappa_edges, key=lambda t: t.key)
    by_signature = {}
    for tau in targets:
        by_signature.setdefault(frozenset(kappa_edges[tau]), []).append(tau)
    groups = sorted(by_signature.items(), key=lambda kv: kv[1][0].key)
    top = max(n.level for n in lower)
    for sig, taus in groups:
        if not any(x.level == top for x in sig):
            raise NotCovered(f"kappa targets {[fmt(t) for t in taus]} have no witness at "
                             f"level {fmt(top)}")
    classes = [tuple(taus) for _, taus in groups]
    class_of = {tau: k for k, taus in enumerate(classes) for tau in taus}
    lower_edges = {k: set(sig) for k, (sig, _) in enumerate(groups)}
    orders_at = {}
    for n in lower:
        orders_at.setdefault(n.level, []).append(n.order)
    maps = {}
    for k, (sig, taus) in enumerate(groups):
        for tau in taus:
            forced = {}
            for x in sig:
                m = frag.pi_tables[(x, Node(KAPPA, tau))]
                for mu in orders_at[x.level]:
                    if mu > x.order:
                        continue
                    v = m(mu)
                    if v in class_of:
                        j = class_of[v]
                        if forced.get(j, v) != v:
                            raise InconsistentCode(
                                f"commutativity forces two values for class {j}", ())
                        forced[j] = v
            maps[(k, tau)] = forced
    return Reconstruction(beta, classes, lower_edges, maps)
