"""Exact arithmetic for ordinals below kappa^+ and piecewise-translation order maps.

An ordinal is kept in omega-Cantor normal form.  Each exponent is a pair
``(k, e)`` standing for ``kappa*k + e`` where ``k`` is a natural number and
``e`` is itself a kappa-free ordinal.  Since ``omega**kappa = kappa``, the term
``omega**(k, e) * n`` is the same as ``kappa**k * omega**e * n``, so the kappa
polynomial view (``kpart`` and ``tail``) is a regrouping of the same terms.
Pairs compare lexicographically, which is the ordinal order on
``kappa*k + e``.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import (
    DomainMismatch,
    NonCanonical,
    OrdinalSyntaxError,
    OutOfDomain,
    Underflow,
    UnsupportedOrdinal,
    ZeroArgument,
)

__all__ = [
    "Ord", "ZERO", "ONE", "OMEGA", "KAPPA", "ord_", "parse", "fmt",
    "left_sub", "omega_pow", "deg", "classify", "div_omega_pow",
    "godel_pair", "godel_unpair", "greatest_below",
    "PiecewiseShift", "shift_apply", "shift_preimage", "shift_compose",
    "check_sloop", "SloopReport", "random_ord", "random_below",
    "iv_norm", "iv_clip", "iv_contains", "iv_covers", "iv_image", "iv_preimage",
]


class Ord:
    """An ordinal below kappa^+ in omega-Cantor normal form (immutable)."""

    __slots__ = ("terms", "_key", "_hash")

    def __init__(self, value=0):
        if isinstance(value, Ord):
            terms = value.terms
        elif isinstance(value, int) and not isinstance(value, bool):
            if value < 0:
                raise Underflow(f"negative ordinal {value}")
            terms = ((_EZ, value),) if value else ()
        else:
            raise TypeError(f"cannot make an ordinal from {value!r}")
        self.terms = terms
        self._key = None
        self._hash = None

    @classmethod
    def _make(cls, terms):
        obj = cls.__new__(cls)
        obj.terms = tuple(terms)
        obj._key = None
        obj._hash = None
        return obj

    # comparison ---------------------------------------------------------

    @property
    def key(self):
        if self._key is None:
            self._key = tuple(((k, e.key), n) for (k, e), n in self.terms)
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.key < other.key

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.key <= other.key

    def __gt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.key > other.key

    def __ge__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.key >= other.key

    def __bool__(self):
        return bool(self.terms)

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        lead, n = other.terms[0]
        lk = _ekey(lead)
        out = []
        for exp, c in self.terms:
            ek = _ekey(exp)
            if ek > lk:
                out.append((exp, c))
            elif ek == lk:
                out.append((exp, c + n))
                out.extend(other.terms[1:])
                return Ord._make(out)
            else:
                break
        out.extend(other.terms)
        return Ord._make(out)

    def __radd__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.terms or not other.terms:
            return ZERO
        lead, c = self.terms[0]
        out = ZERO
        for exp, n in other.terms:
            if exp == _EZ:
                part = Ord._make(((lead, c * n),) + self.terms[1:])
            else:
                part = Ord._make(((_exp_add(lead, exp), n),))
            out = out + part
        return out

    def __rmul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self

    # structure ----------------------------------------------------------

    @property
    def is_nat(self):
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == _EZ)

    def __int__(self):
        if not self.is_nat:
            raise OverflowError(f"{fmt(self)} is infinite")
        return self.terms[0][1] if self.terms else 0

    def __index__(self):
        return int(self)

    @property
    def kappa_free(self):
        return all(k == 0 for (k, _), _ in self.terms)

    @property
    def kpart(self):
        """Kappa polynomial part as ``[(k, coefficient)]`` with k decreasing."""
        out = []
        for (k, e), n in self.terms:
            if k == 0:
                break
            if out and out[-1][0] == k:
                out[-1] = (k, out[-1][1] + Ord._make((((0, e), n),)))
            else:
                out.append((k, Ord._make((((0, e), n),))))
        return out

    @property
    def tail(self):
        return Ord._make(t for t in self.terms if t[0][0] == 0)

    @property
    def finite_part(self):
        if self.terms and self.terms[-1][0] == _EZ:
            return self.terms[-1][1]
        return 0

    @property
    def limit_part(self):
        if self.terms and self.terms[-1][0] == _EZ:
            return Ord._make(self.terms[:-1])
        return self

    @property
    def is_limit(self):
        return bool(self.terms) and self.terms[-1][0] != _EZ

    @property
    def limit_or_zero(self):
        return not self.terms or self.terms[-1][0] != _EZ

    @property
    def is_successor(self):
        return bool(self.terms) and self.terms[-1][0] == _EZ

    def pred(self):
        """Immediate predecessor of a successor ordinal."""
        if not self.is_successor:
            raise ValueError(f"{fmt(self)} is not a successor")
        n = self.terms[-1][1]
        head = self.terms[:-1]
        return Ord._make(head + (((_EZ, n - 1),) if n > 1 else ()))

    @property
    def lead_exp(self):
        return self.terms[0][0] if self.terms else None

    @property
    def last_exp(self):
        return self.terms[-1][0] if self.terms else None

    def __repr__(self):
        return f"Ord({fmt(self)!r})"

    def __str__(self):
        return fmt(self)


_EZ = (0, None)  # placeholder, replaced right after ZERO exists


def _ekey(exp):
    return (exp[0], exp[1].key)


def _exp_add(a, b):
    """Sum of exponents ``kappa*k1+e1 + kappa*k2+e2``."""
    if b[0] > 0:
        return (a[0] + b[0], b[1])
    return (a[0], a[1] + b[1])


def _exp_lt(a, b):
    return _ekey(a) < _ekey(b)


def _coerce(x):
    if isinstance(x, Ord):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Ord(x)
    return NotImplemented


ZERO = Ord._make(())
_EZ = (0, ZERO)
ONE = Ord._make(((_EZ, 1),))
OMEGA = Ord._make((((0, ONE), 1),))
KAPPA = Ord._make((((1, ZERO), 1),))


def ord_(x) -> Ord:
    """Coerce an int, string or Ord into an Ord."""
    if isinstance(x, str):
        return parse(x)
    out = _coerce(x)
    if out is NotImplemented:
        raise TypeError(f"cannot make an ordinal from {x!r}")
    return out


def wpow(exp, n=1) -> Ord:
    """omega**exp * n for an exponent pair."""
    return Ord._make(((exp, n),)) if n else ZERO


def omega_pow(e) -> Ord:
    e = ord_(e)
    if not e.kappa_free:
        raise UnsupportedOrdinal("omega_pow takes a kappa-free exponent")
    return wpow((0, e))


def left_sub(a, b) -> Ord:
    """The unique g with a + g = b."""
    a, b = ord_(a), ord_(b)
    if a > b:
        raise Underflow(f"{fmt(a)} > {fmt(b)}")
    at, bt = a.terms, b.terms
    i = 0
    while i < len(at) and at[i] == bt[i]:
        i += 1
    if i == len(at):
        return Ord._make(bt[i:])
    (ea, na), (eb, nb) = at[i], bt[i]
    if ea == eb:
        return Ord._make(((eb, nb - na),) + bt[i + 1:])
    return Ord._make(bt[i:])


def deg(a) -> Ord:
    """Least CNF exponent of a kappa-free a > 0."""
    a = ord_(a)
    if not a.terms:
        raise ZeroArgument("deg(0) is undefined")
    k, e = a.terms[-1][0]
    if k:
        raise UnsupportedOrdinal("deg is defined on kappa-free ordinals")
    return e


def classify(a):
    """Return ``("zero", None)``, ``("successor", pred)`` or ``("limit", None)``."""
    a = ord_(a)
    if not a.terms:
        return ("zero", None)
    if a.is_successor:
        return ("successor", a.pred())
    return ("limit", None)


def div_omega_pow(a, g):
    """Split kappa-free a as omega**g * q + r with r < omega**g."""
    a, g = ord_(a), ord_(g)
    q, r = [], []
    for (k, e), n in a.terms:
        if k:
            raise UnsupportedOrdinal("div_omega_pow is defined on kappa-free ordinals")
        if e >= g:
            q.append(((0, left_sub(g, e)), n))
        else:
            r.append(((0, e), n))
    return Ord._make(q), Ord._make(r)


# parsing and formatting -------------------------------------------------

def _fmt_small_term(e: Ord, n: int) -> str:
    if not e.terms:
        return str(n)
    if e == ONE:
        s = "w"
    elif e.is_nat:
        s = f"w^{int(e)}"
    else:
        s = f"w^({fmt(e)})"
    return s if n == 1 else f"{s}*{n}"


def fmt(x) -> str:
    x = ord_(x)
    if not x.terms:
        return "0"
    parts = []
    for (k, e), n in x.terms:
        if k == 0:
            parts.append(_fmt_small_term(e, n))
            continue
        s = "k" if k == 1 else f"k^{k}"
        if e.terms or n != 1:
            s += "*" + _fmt_small_term(e, n)
        parts.append(s)
    return "+".join(parts)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def fail(self, msg, cls=OrdinalSyntaxError):
        raise cls(msg, self.text, self.pos)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def nat(self):
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        digits = self.text[start:self.pos]
        if not digits:
            self.fail("expected a natural number")
        if len(digits) > 1 and digits[0] == "0":
            self.pos = start
            self.fail("leading zero", NonCanonical)
        return int(digits)

    def coefficient(self):
        if not self.eat("*"):
            return 1
        start = self.pos
        n = self.nat()
        if n < 2:
            self.pos = start
            self.fail("coefficient must be at least 2", NonCanonical)
        return n

    def small_term(self):
        """Return (exponent, coefficient) for a kappa-free term."""
        start = self.pos
        if self.eat("w"):
            exp = ONE
            if self.eat("^"):
                if self.eat("("):
                    inner = self.pos
                    exp = self.small_sum()
                    if exp.is_nat:
                        self.pos = inner
                        self.fail("finite exponent must not be parenthesised", NonCanonical)
                    if not self.eat(")"):
                        self.fail("expected ')'")
                else:
                    inner = self.pos
                    n = self.nat()
                    if n < 2:
                        self.pos = inner
                        self.fail("exponent must be at least 2", NonCanonical)
                    exp = Ord(n)
            return exp, self.coefficient()
        if self.peek().isdigit():
            n = self.nat()
            if n == 0:
                self.pos = start
                self.fail("zero term inside a sum", NonCanonical)
            return ZERO, n
        self.fail("expected 'w' or a natural number")

    def small_sum(self):
        terms = [self.term_pair(allow_kappa=False)]
        while self.eat("+"):
            terms.append(self.term_pair(allow_kappa=False))
        return self.assemble(terms)

    def term_pair(self, allow_kappa=True):
        start = self.pos
        if self.peek() == "k":
            if not allow_kappa:
                self.fail("kappa is not allowed here")
            self.pos += 1
            k = 1
            if self.eat("^"):
                inner = self.pos
                k = self.nat()
                if k < 2:
                    self.pos = inner
                    self.fail("kappa exponent must be at least 2", NonCanonical)
            e, n = ZERO, 1
            if self.eat("*"):
                inner = self.pos
                e, n = self.small_term()
                if not e.terms and n == 1:
                    self.pos = inner
                    self.fail("coefficient 1 must be omitted", NonCanonical)
            return start, (k, e), n
        e, n = self.small_term()
        return start, (0, e), n

    def assemble(self, terms):
        out = []
        for start, exp, n in terms:
            if out and not _exp_lt(exp, out[-1][0]):
                self.pos = start
                self.fail("terms must strictly decrease", NonCanonical)
            out.append((exp, n))
        return Ord._make(out)

    def ordinal(self):
        if self.text == "0":
            self.pos = 1
            return ZERO
        terms = [self.term_pair()]
        while self.eat("+"):
            terms.append(self.term_pair())
        value = self.assemble(terms)
        if self.pos != len(self.text):
            self.fail("unexpected trailing input")
        return value


def parse(text: str) -> Ord:
    """Parse the canonical ordinal grammar; non-canonical input is rejected."""
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    return _Parser(text.strip()).ordinal()


# max-lex pairing --------------------------------------------------------

def _exp_times2(E):
    return _exp_add(E, E)


def _shell_lead_exp(E):
    """Exponent L with sum_{mu < omega**E} (mu*2+1) = omega**L."""
    k, e = E
    if not e.terms:
        if k == 0:
            return _EZ
        return (2 * k - 1, ZERO)
    if e.is_successor:
        e1 = e.pred()
        base = _exp_times2((k, e1))
        return (base[0], base[1] + ONE)
    # e a limit: split off one copy of its last term omega**c
    (ck, c), cn = e.terms[-1]
    d = Ord._make(e.terms[:-1] + ((((ck, c), cn - 1),) if cn > 1 else ()))
    base = _exp_times2((k, d))
    return (base[0], base[1] + wpow((0, c)))


def _shells_below(m: Ord) -> Ord:
    """Number of pairs whose max is below m, i.e. sum_{mu<m} (mu*2+1)."""
    if not m.terms:
        return ZERO
    f = m.finite_part
    lim = m.limit_part
    if not lim.terms:
        return Ord(f * f)
    (E1, n1), rest = lim.terms[0], lim.terms[1:]
    out = wpow(_shell_lead_exp(E1))
    if n1 > 1:
        out = out + wpow(_exp_times2(E1), n1 - 1)
    for E, n in rest:
        out = out + wpow(_exp_add(E1, E), n)
    if f:
        out = out + lim * (2 * f) + f
    return out


def godel_pair(t, n) -> Ord:
    """Rank of (t, n) in the max-lex order: by max, then lexicographically."""
    t, n = ord_(t), ord_(n)
    m = t if t >= n else n
    pos = t if t < m else m + n
    return _shells_below(m) + pos


def godel_unpair(b):
    """Inverse of godel_pair."""
    b = ord_(b)
    m = greatest_below(lambda x: _shells_below(x) <= b, b + 1)
    off = left_sub(_shells_below(m), b)
    if off < m:
        return off, m
    return m, left_sub(m, off)


def greatest_below(pred: Callable[[Ord], bool], cap: Ord) -> Ord:
    """Greatest x < cap with pred(x).

    pred must hold at 0, be downward closed and closed under suprema, and
    fail at cap.  The answer is assembled term by term, greatest exponent
    first, with maximal finite coefficients.
    """
    x = ZERO
    last = None
    while True:
        if last == _EZ or not pred(x + 1):
            return x
        exp = _greatest_exp(lambda E: pred(x + wpow(E)), last, cap)
        n = 1
        while pred(x + wpow(exp, n + 1)):
            n += 1
        x = x + wpow(exp, n)
        last = exp


def _greatest_exp(p, last, cap):
    if last is not None:
        kmax = last[0]
    else:
        kmax = cap.lead_exp[0] if cap.terms else 0
    for k in range(kmax, -1, -1):
        if last is not None and not _exp_lt((k, ZERO), last):
            continue
        if p((k, ZERO)):
            break
    else:  # pragma: no cover - p((0, 0)) holds whenever pred(x + 1) does
        raise AssertionError("no admissible exponent")
    if last is not None and last[0] == k:
        ecap = last[1]
    else:
        ecap = ONE
        while p((k, ecap)):
            ecap = wpow((0, ecap))
    return (k, greatest_below(lambda e: p((k, e)), ecap))


# piecewise shifts --------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseShift:
    """Order-preserving piecewise translation on [0, domain).

    Piece i covers [src_i, src_{i+1}) and sends g to dst_i + (g - src_i).
    """

    domain: Ord
    pieces: tuple

    def __post_init__(self):
        object.__setattr__(self, "domain", ord_(self.domain))
        object.__setattr__(
            self, "pieces",
            tuple((ord_(s), ord_(d)) for s, d in self.pieces),
        )

    @classmethod
    def identity(cls, domain):
        return cls(ord_(domain), ((ZERO, ZERO),))

    @classmethod
    def from_pieces(cls, domain, pieces):
        return cls(ord_(domain), tuple(pieces)).normalized()

    def _index(self, g):
        keys = [s.key for s, _ in self.pieces]
        return bisect.bisect_right(keys, g.key) - 1

    def __call__(self, g):
        return shift_apply(self, g)

    def piece_length(self, i):
        hi = self.pieces[i + 1][0] if i + 1 < len(self.pieces) else self.domain
        return left_sub(self.pieces[i][0], hi)

    @property
    def image_end(self):
        """Supremum of the image, dst_last + (domain - src_last)."""
        s, d = self.pieces[-1]
        return d + left_sub(s, self.domain)

    def normalized(self):
        out = []
        for i, (s, d) in enumerate(self.pieces):
            if s >= self.domain and i > 0:
                break
            if out:
                ps, pd = out[-1]
                if pd + left_sub(ps, s) == d:
                    continue
            out.append((s, d))
        return PiecewiseShift(self.domain, tuple(out))

    def restrict(self, domain):
        domain = ord_(domain)
        if domain > self.domain:
            raise OutOfDomain(f"cannot extend domain {fmt(self.domain)} to {fmt(domain)}")
        return PiecewiseShift(domain, self.pieces).normalized()

    def is_identity(self):
        return self.normalized().pieces == ((ZERO, ZERO),)

    def to_doc(self):
        return {"domain": fmt(self.domain),
                "pieces": [[fmt(s), fmt(d)] for s, d in self.pieces]}

    @classmethod
    def from_doc(cls, doc):
        return cls(parse(doc["domain"]), tuple((parse(s), parse(d)) for s, d in doc["pieces"]))

    def __str__(self):
        body = ", ".join(f"{fmt(s)}->{fmt(d)}" for s, d in self.pieces)
        return f"shift[{fmt(self.domain)}]({body})"


def shift_apply(m: PiecewiseShift, g) -> Ord:
    g = ord_(g)
    if g >= m.domain:
        raise OutOfDomain(f"{fmt(g)} is outside the domain {fmt(m.domain)}")
    s, d = m.pieces[m._index(g)]
    return d + left_sub(s, g)


def shift_preimage(m: PiecewiseShift, v) -> Optional[Ord]:
    v = ord_(v)
    keys = [d.key for _, d in m.pieces]
    i = bisect.bisect_right(keys, v.key) - 1
    if i < 0:
        return None
    s, d = m.pieces[i]
    off = left_sub(d, v)
    if off >= m.piece_length(i):
        return None
    return s + off


def shift_compose(outer: PiecewiseShift, inner: PiecewiseShift) -> PiecewiseShift:
    """outer after inner, as a single normalized shift on inner's domain."""
    if inner.image_end > outer.domain:
        raise DomainMismatch(
            f"image of inner reaches {fmt(inner.image_end)}, outer domain is {fmt(outer.domain)}")
    cuts = {s for s, _ in inner.pieces}
    for s, _ in outer.pieces:
        pre = shift_preimage(inner, s)
        if pre is not None:
            cuts.add(pre)
    pieces = []
    for c in sorted(cuts):
        if c < inner.domain:
            pieces.append((c, shift_apply(outer, shift_apply(inner, c))))
    return PiecewiseShift(inner.domain, tuple(pieces)).normalized()


@dataclass
class SloopReport:
    ok: bool
    failures: list = field(default_factory=list)


def check_sloop(m: PiecewiseShift) -> SloopReport:
    """Structural SLOOP check: anchored at (0,0), limit-or-zero cuts, increasing."""
    fails = []
    if not m.pieces or m.pieces[0] != (ZERO, ZERO):
        fails.append("first piece is not anchored at (0, 0)")
    for s, d in m.pieces:
        if not s.limit_or_zero:
            fails.append(f"source boundary {fmt(s)} is a successor")
        if not d.limit_or_zero:
            fails.append(f"target boundary {fmt(d)} is a successor")
    for i in range(len(m.pieces) - 1):
        (s0, d0), (s1, d1) = m.pieces[i], m.pieces[i + 1]
        if s1 <= s0:
            fails.append(f"source boundaries not increasing at {fmt(s1)}")
        elif d1 < d0 + left_sub(s0, s1):
            fails.append(f"image overlaps at {fmt(s1)}: {fmt(d1)} < {fmt(d0 + left_sub(s0, s1))}")
    return SloopReport(not fails, fails)


# random generation (documented so seeds reproduce) ----------------------

def random_ord(rng: random.Random, depth=3, max_terms=4, max_coeff=9, kappa=False) -> Ord:
    """Random CNF with at most max_terms terms, exponents of nesting <= depth."""
    nterms = rng.randint(0, max_terms)
    exps = set()
    for _ in range(nterms):
        k = rng.randint(0, 2) if kappa and rng.random() < 0.5 else 0
        e = random_ord(rng, depth - 1, max_terms - 1, max_coeff) if depth > 1 and rng.random() < 0.7 else Ord(rng.randint(0, 3))
        exps.add((k, e))
    exps = sorted(exps, key=_ekey, reverse=True)
    return Ord._make((ex, rng.randint(1, max_coeff)) for ex in exps)


def random_below(rng: random.Random, bound, max_coeff=9) -> Ord:
    """Random ordinal strictly below bound (bound > 0), biased to stay deep."""
    bound = ord_(bound)
    if not bound.terms:
        raise ZeroArgument("nothing lies below 0")
    i = rng.randrange(len(bound.terms))
    head = bound.terms[:i]
    exp, n = bound.terms[i]
    c = rng.randrange(n)
    out = Ord._make(head + (((exp, c),) if c else ()))
    if exp == _EZ:
        return out
    # something below omega**exp
    if rng.random() < 0.3:
        return out
    k, e = exp
    if e.terms and (k == 0 or rng.random() < 0.6):
        sub = (k, random_below(rng, e, max_coeff))
    elif k > 0:
        sub = (rng.randrange(k), random_ord(rng, 2, 2, 4))
    else:
        return out
    tail = wpow(sub, rng.randint(1, max_coeff))
    if rng.random() < 0.5 and sub != _EZ:
        tail = tail + random_below(rng, wpow(sub), max_coeff)
    return out + tail


# interval sets ----------------------------------------------------------
# A finite union of half-open ordinal intervals, kept as a sorted tuple of
# disjoint, non-adjacent (lo, hi) pairs.

def iv_norm(intervals) -> tuple:
    items = sorted(((ord_(a), ord_(b)) for a, b in intervals if ord_(a) < ord_(b)),
                   key=lambda p: p[0].key)
    out = []
    for a, b in items:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


def iv_clip(intervals, lo, hi) -> tuple:
    lo, hi = ord_(lo), ord_(hi)
    return iv_norm((max(a, lo), min(b, hi)) for a, b in intervals)


def iv_contains(intervals, x) -> bool:
    x = ord_(x)
    return any(a <= x < b for a, b in intervals)


def iv_covers(intervals, lo, hi) -> bool:
    """True when [lo, hi) lies inside the union."""
    lo, hi = ord_(lo), ord_(hi)
    if lo >= hi:
        return True
    return any(a <= lo and hi <= b for a, b in iv_norm(intervals))


def _shift_spans(m: PiecewiseShift):
    for i, (s, d) in enumerate(m.pieces):
        e = m.pieces[i + 1][0] if i + 1 < len(m.pieces) else m.domain
        if s < e:
            yield s, e, d


def iv_image(m: PiecewiseShift, intervals) -> tuple:
    out = []
    for s, e, d in _shift_spans(m):
        for a, b in intervals:
            lo, hi = max(a, s), min(b, e)
            if lo < hi:
                out.append((d + left_sub(s, lo), d + left_sub(s, hi)))
    return iv_norm(out)


def iv_preimage(m: PiecewiseShift, intervals) -> tuple:
    out = []
    for s, e, d in _shift_spans(m):
        dend = d + left_sub(s, e)
        for a, b in intervals:
            lo, hi = max(a, d), min(b, dend)
            if lo < hi:
                out.append((s + left_sub(d, lo), s + left_sub(d, hi)))
    return iv_norm(out)
