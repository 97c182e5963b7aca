"""Build a short descending run, patch it below another condition, and export the limit."""

import sys

from mangrove.cond import add_block, bamboo, tower_ext
from mangrove.homog import patch
from mangrove.kord import OMEGA, fmt, omega_pow
from mangrove.order import leq
from mangrove.sim import EnsureEmu, EnsureLambda, EnsureS, limit_fragment, run
from mangrove.verify import check_fragment, fragment_to_dot


def main(dot_path=None):
    r = run([EnsureS([OMEGA * 5]), EnsureLambda(omega_pow(OMEGA) * 3), EnsureEmu()], budget=200)
    for step in r.steps:
        c = step.condition
        print(f"{type(step.goal).__name__:13s} lambda={fmt(c.lam):12s} blocks={[fmt(b) for b in c.blocks]}")
    target = tower_ext(add_block(bamboo(), OMEGA * 4), 1)
    moved = patch(r, target, budget=200)
    print(f"patched final below target: {leq(moved.final, target).status}")
    frag = limit_fragment(r)
    print(f"limit fragment: {len(frag.nodes)} nodes, {len(frag.edges)} edges, "
          f"check {'ok' if check_fragment(frag).ok else 'failed'}")
    if dot_path:
        with open(dot_path, "w", encoding="utf-8") as fh:
            fh.write(fragment_to_dot(frag))
        print(f"wrote {dot_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
