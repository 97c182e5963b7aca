"""Widths, axiom checks and the first code bits of the bamboo condition."""

from mangrove.cond import bamboo
from mangrove.kord import OMEGA, ZERO, fmt, parse
from mangrove.morcode import code_dump, positions_in_range
from mangrove.verify import check_condition


def main():
    b = bamboo()
    for text in ["5", "w", "w^2*3", "w^3*4+w", "w^(w)"]:
        print(f"theta({text}) = {fmt(b.theta(parse(text)))}")
    rep = check_condition(b, budget=2000, seed=0)
    print(f"check_condition: {'ok' if rep.ok else rep.failed()}")
    print("code bits below w*6:")
    print(code_dump(b, positions_in_range(ZERO, OMEGA * 6)), end="")
    print(f"lambda = {fmt(b.lam)}, blocks = {[fmt(x) for x in b.blocks]}")


if __name__ == "__main__":
    main()
