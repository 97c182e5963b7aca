"""Goal-driven descending runs and fragments of their final conditions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from . import cond as _cond
from .cond import Condition, bamboo
from .errors import MangroveError, TermFormatError
from .kord import KAPPA, OMEGA, ZERO, div_omega_pow, fmt, left_sub, ord_, parse
from .order import leq
from .verify import Fragment, extract_fragment

__all__ = [
    "EnsureS", "EnsureLambda", "EnsureEmu", "Custom", "Mark", "Step", "Run",
    "run", "extend", "limit_fragment", "goal_from_doc", "load_script",
    "emu_witness", "check_run", "run_boundaries",
]

PLAIN, UNIVERSAL = "plain", "universal"


def _ords(values):
    return tuple(sorted({ord_(v) for v in values}, key=lambda v: v.key))


@dataclass(frozen=True)
class EnsureS:
    """Every member of ``targets`` lies in S."""

    targets: tuple

    def __post_init__(self):
        object.__setattr__(self, "targets", _ords(self.targets))

    def satisfied(self, c):
        return all(c.in_s(t) for t in self.targets)

    def to_doc(self):
        return {"kind": "ensure_s", "targets": [fmt(t) for t in self.targets]}


@dataclass(frozen=True)
class EnsureLambda:
    """lambda reaches at least ``beta``."""

    beta: object

    def __post_init__(self):
        object.__setattr__(self, "beta", ord_(self.beta))

    def satisfied(self, c):
        return c.lam >= self.beta

    def to_doc(self):
        return {"kind": "ensure_lambda", "beta": fmt(self.beta)}


@dataclass(frozen=True)
class EnsureEmu:
    """lambda = mu + omega^ot(S) * alpha for some alpha > ot(S).

    ``mu=None`` means the lambda of the condition the goal starts from.
    """

    mu: Optional[object] = None

    def __post_init__(self):
        if self.mu is not None:
            object.__setattr__(self, "mu", ord_(self.mu))

    def satisfied(self, c):
        return self.mu is not None and emu_witness(c, self.mu) is not None

    def to_doc(self):
        return {"kind": "ensure_emu", "mu": None if self.mu is None else fmt(self.mu)}


@dataclass(frozen=True)
class Custom:
    """A direct constructor call: ``add_block`` with a base or ``tower_ext`` with a coefficient."""

    op: str
    arg: object

    def __post_init__(self):
        if self.op not in ("add_block", "tower_ext"):
            raise TermFormatError(f"unknown custom step {self.op!r}")
        object.__setattr__(self, "arg", ord_(self.arg))

    def satisfied(self, c):
        return False

    def to_doc(self):
        return {"kind": "custom", "op": self.op, "arg": fmt(self.arg)}


@dataclass(frozen=True)
class Mark:
    """A label for steps that were not produced by a goal (starts, patch output)."""

    label: str
    detail: Optional[str] = None

    def satisfied(self, c):
        return True

    def to_doc(self):
        doc = {"kind": "mark", "label": self.label}
        if self.detail is not None:
            doc["detail"] = self.detail
        return doc


def goal_from_doc(doc):
    if not isinstance(doc, dict):
        raise TermFormatError(f"not a goal: {doc!r:.80}")
    kind = doc.get("kind")
    try:
        if kind == "ensure_s":
            return EnsureS([parse(t) for t in doc["targets"]])
        if kind == "ensure_lambda":
            return EnsureLambda(parse(doc["beta"]))
        if kind == "ensure_emu":
            mu = doc.get("mu")
            return EnsureEmu(None if mu is None else parse(mu))
        if kind == "custom":
            return Custom(doc["op"], parse(doc["arg"]))
        if kind == "mark":
            return Mark(doc["label"], doc.get("detail"))
    except KeyError as exc:
        raise TermFormatError(f"goal {kind} lacks field {exc}") from None
    raise TermFormatError(f"unknown goal kind {kind!r}")


def load_script(text):
    """A script is a JSON list of goal documents."""
    try:
        docs = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TermFormatError(f"script is not JSON: {exc}") from None
    if not isinstance(docs, list):
        raise TermFormatError("a script is a list of goals")
    return [goal_from_doc(d) for d in docs]


def emu_witness(c: Condition, mu):
    """The alpha with lambda^c = mu + omega^ot * alpha and alpha > ot, or None."""
    mu = ord_(mu)
    if mu > c.lam:
        return None
    alpha, rest = div_omega_pow(left_sub(mu, c.lam), c.ot)
    return alpha if not rest and alpha > c.ot else None


@dataclass(frozen=True)
class Step:
    goal: object
    condition: Condition
    certificate: Optional[dict]

    def to_doc(self):
        return {"goal": self.goal.to_doc(), "term": self.condition.to_doc(),
                "certificate": self.certificate}


@dataclass(frozen=True)
class Run:
    mode: str
    aprime: object
    steps: tuple
    seed: Optional[int] = None
    budget: Optional[int] = None

    @property
    def final(self) -> Condition:
        return self.steps[-1].condition

    @property
    def conditions(self):
        return [s.condition for s in self.steps]

    def to_doc(self):
        return {
            "mode": self.mode,
            "aprime": None if self.aprime is None else [fmt(v) for v in self.aprime.members],
            "steps": [s.to_doc() for s in self.steps],
            "seed": self.seed,
            "budget": self.budget,
        }

    def dumps(self):
        return json.dumps(self.to_doc(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_doc(cls, doc):
        if not isinstance(doc, dict) or not (
                {"mode", "aprime", "steps"} <= set(doc) <= {"mode", "aprime", "steps", "seed", "budget"}):
            raise TermFormatError("a run has the fields mode, aprime, steps and optionally seed, budget")
        mode = doc["mode"]
        if mode not in (PLAIN, UNIVERSAL):
            raise TermFormatError(f"unknown mode {mode!r}")
        aprime = None
        if doc["aprime"] is not None:
            from .universal import APrime
            aprime = APrime([parse(v) for v in doc["aprime"]])
        steps = []
        for s in doc["steps"]:
            if not isinstance(s, dict) or set(s) != {"goal", "term", "certificate"}:
                raise TermFormatError("a step has exactly the fields goal, term, certificate")
            steps.append(Step(goal_from_doc(s["goal"]), _cond.from_doc(s["term"]),
                              s["certificate"]))
        if not steps:
            raise TermFormatError("a run has at least one step")
        return cls(mode, aprime, tuple(steps), doc.get("seed"), doc.get("budget"))

    @classmethod
    def loads(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TermFormatError(f"run file is not JSON: {exc}") from None
        return cls.from_doc(doc)


class _Builders:
    """Constructors for the run mode: plain ones, or the universal variants."""

    def __init__(self, mode, aprime):
        self.mode = mode
        self.aprime = aprime
        if mode == UNIVERSAL:
            from . import universal
            self._u = universal

    def add_block(self, c, base):
        if self.mode == UNIVERSAL:
            return self._u.add_block_u(c, base, self.aprime)
        return _cond.add_block(c, base)

    def tower_ext(self, c, alpha):
        if self.mode == UNIVERSAL:
            return self._u.tower_ext_u(c, alpha, self.aprime)
        return _cond.tower_ext(c, alpha)


def _achieve(goal, c: Condition, ops: _Builders):
    """Return (new condition, extra certificate fields)."""
    if isinstance(goal, EnsureS):
        for t in goal.targets:
            if not c.in_s(t):
                c = ops.add_block(c, t.limit_part)
        return c, {}
    if isinstance(goal, EnsureLambda):
        if goal.satisfied(c):
            return c, {"already": True}
        l, _ = div_omega_pow(c.lam, c.ot)
        b, lo = div_omega_pow(goal.beta, c.ot)
        if lo:
            b = b + 1
        coeff = left_sub(l, b) if b > l + 1 else ord_(1)
        return ops.tower_ext(c, coeff), {}
    if isinstance(goal, EnsureEmu):
        mu = c.lam if goal.mu is None else goal.mu
        if emu_witness(c, mu) is not None:
            return c, {"already": True, "alpha": fmt(emu_witness(c, mu))}
        g = c.ot
        l, _ = div_omega_pow(c.lam, g)
        m, _ = div_omega_pow(mu, g)
        target = max(m + g + 1, l + 1)
        c = ops.tower_ext(c, left_sub(l, target))
        return c, {"mu": fmt(mu), "alpha": fmt(left_sub(m, target))}
    if isinstance(goal, Custom):
        if goal.op == "add_block":
            return ops.add_block(c, goal.arg), {}
        return ops.tower_ext(c, goal.arg), {}
    if isinstance(goal, Mark):
        return c, {}
    raise TypeError(f"not a goal: {goal!r}")


def _met(goal, c, info):
    if isinstance(goal, EnsureEmu):
        mu = info.get("mu")
        return emu_witness(c, parse(mu)) is not None if mu else emu_witness(c, goal.mu) is not None
    if isinstance(goal, Custom):
        return True
    return goal.satisfied(c)


def extend(r: Run, script, budget=200, seed=0) -> Run:
    """Append one step per goal, each extending the previous condition."""
    ops = _Builders(r.mode, r.aprime)
    steps = list(r.steps)
    for goal in script:
        prev = steps[-1].condition
        cur, info = _achieve(goal, prev, ops)
        cert = {"leq_previous": leq(cur, prev, budget, seed).to_doc(),
                "goal_met": _met(goal, cur, info)}
        cert.update(info)
        if r.mode == UNIVERSAL:
            from .universal import check_universal
            cert["universal"] = check_universal(cur, r.aprime, budget, seed).ok
        steps.append(Step(goal, cur, cert))
    return Run(r.mode, r.aprime, tuple(steps), seed, budget)


def run(script, mode=PLAIN, aprime=None, start=None, budget=200, seed=0) -> Run:
    """Build a run from ``start`` (bamboo by default) by achieving each goal in order."""
    if mode not in (PLAIN, UNIVERSAL):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == UNIVERSAL and aprime is None:
        raise ValueError("universal mode needs an A' set")
    first = bamboo() if start is None else start
    cert = None
    if mode == UNIVERSAL:
        from .universal import check_universal
        cert = {"universal": check_universal(first, aprime, budget, seed).ok}
    head = Run(mode, aprime, (Step(Mark("start"), first, cert),))
    return extend(head, script, budget, seed)


def limit_fragment(r: Run, max_order=OMEGA * 3, max_nodes=4096, per_block=2,
                   extra_levels=()) -> Fragment:
    """Fragment of the final condition at the run boundaries and just above them."""
    final = r.final
    levels = {ZERO, KAPPA}
    for c in r.conditions:
        levels.add(c.lam)
        for off in (1, OMEGA):
            if c.lam + off <= final.lam:
                levels.add(c.lam + off)
    levels.update(ord_(a) for a in extra_levels)
    frag = extract_fragment(final, levels, max_order, max_nodes, per_block)
    if r.mode == UNIVERSAL:
        from .universal import decorate_fragment
        frag = decorate_fragment(frag, final, r.aprime)
    return frag


def run_boundaries(r: Run):
    return sorted({c.lam for c in r.conditions}, key=lambda a: a.key)


def check_run(r: Run, budget=200, seed=0):
    """Adjacent leq verdicts plus boundary mangal status against later steps."""
    problems = []
    conds = r.conditions
    for i in range(1, len(conds)):
        v = leq(conds[i], conds[i - 1], budget, seed)
        if not v.proven:
            problems.append({"step": i, "leq": v.to_doc()})
    for i, c in enumerate(conds):
        for later in conds[i + 1:]:
            try:
                st = later.mangal_status(c.lam)
            except MangroveError as exc:
                problems.append({"step": i, "mangal": str(exc)})
                continue
            if not st.proven:
                problems.append({"step": i, "mangal": st.to_doc()})
    return problems
