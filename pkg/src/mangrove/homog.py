"""Homogeneity: the swap automorphisms, profile alignment and run patching."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .cond import Condition, splice, tower_ext
from .errors import AboveLambda, NotAligned, NotMatchable, Undecided
from .kord import div_omega_pow, fmt, left_sub
from .order import add_blocks, leq, mu_equiv

__all__ = ["AutoMap", "phi", "align", "patch"]


@dataclass(frozen=True)
class AutoMap:
    """The automorphism of the conditions above lambda^p swapping p-like and r-like parts."""

    p: Condition
    r: Condition
    budget: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.p.lam != self.r.lam:
            raise NotAligned(f"lambdas differ: {fmt(self.p.lam)} vs {fmt(self.r.lam)}")
        if self.p.theta(self.p.lam) != self.r.theta(self.r.lam):
            raise NotAligned("top widths differ")

    @property
    def mu(self):
        return self.p.lam

    def __call__(self, q: Condition) -> Condition:
        return phi(self, q)


def phi(a: AutoMap, q: Condition) -> Condition:
    if q.lam < a.mu:
        raise AboveLambda(f"lambda^q = {fmt(q.lam)} lies below {fmt(a.mu)}")
    like_p = mu_equiv(q, a.p, a.mu, a.budget, a.seed)
    like_r = mu_equiv(q, a.r, a.mu, a.budget, a.seed)
    for v in (like_p, like_r):
        if v.unknown:
            raise Undecided(v.detail)
    if like_p.proven:
        return splice(q, a.p, a.r)
    if like_r.proven:
        return splice(q, a.r, a.p)
    return q


def _tower_to(c: Condition, target):
    """Tower c so that lambda becomes omega^ot * target."""
    whole, _ = div_omega_pow(c.lam, c.ot)
    return tower_ext(c, left_sub(whole, target))


def align(p: Condition, q: Condition):
    """Extensions of p and q with equal blocks, lambda and top width."""
    p1 = add_blocks(p, [b for b in q.blocks if b not in p.blocks])
    q1 = add_blocks(q, [b for b in p.blocks if b not in q.blocks])
    g = p1.ot
    lp, _ = div_omega_pow(p1.lam, g)
    lq, _ = div_omega_pow(q1.lam, g)
    target = max(lp, lq) + 1
    p2, q2 = _tower_to(p1, target), _tower_to(q1, target)
    if p2.lam != q2.lam or p2.theta(p2.lam) != q2.theta(q2.lam):
        raise NotMatchable("aligned profiles still differ")
    return p2, q2


def patch(run, p: Condition, budget=200, seed=0):
    """Move a run so that it passes through an extension of p.

    The run is first extended until its last condition r has every block of
    p and lambda^r = lambda^p + omega^ot(S^r) * alpha with alpha > ot(S^r).
    Then p' is p with the missing blocks added and towered up to lambda^r,
    and the steps at or above lambda^r are pushed through the swap of p'
    and r.  The returned run starts at p, so it is descending and below p.
    """
    from .sim import EnsureEmu, EnsureS, Mark, Run, Step, extend

    run = extend(run, [EnsureS(p.blocks), EnsureEmu(p.lam)], budget, seed)
    r = run.final
    p1 = add_blocks(p, [b for b in r.blocks if b not in p.blocks])
    delta = left_sub(p1.lam, r.lam)
    alpha, rest = div_omega_pow(delta, r.ot)
    if rest:
        raise NotMatchable(f"{fmt(delta)} is not a multiple of omega^{fmt(r.ot)}")
    p2 = tower_ext(p1, alpha) if alpha else p1
    swap = AutoMap(p2, r, budget, seed)
    steps = [Step(Mark("patch_target"), p, None)]
    prev = p
    for st in run.steps:
        if st.condition.lam < r.lam:
            continue
        image = swap(st.condition)
        if image == prev:
            continue
        steps.append(Step(Mark("patch_image", json.dumps(st.goal.to_doc(), sort_keys=True)), image,
                          {"leq_previous": leq(image, prev, budget, seed).to_doc(),
                           "leq_target": leq(image, p, budget, seed).to_doc()}))
        prev = image
    return Run(run.mode, run.aprime, tuple(steps), seed, budget)
