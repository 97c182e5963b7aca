"""Command-line front end: ``mangrove <subcommand> ...``.

Exit codes: 0 on success or a passing check, 1 on a failing check, 2 on bad
usage or unreadable input.  Every randomized step takes ``--seed`` (default 0),
so repeated invocations write identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import cond
from .cond import Node
from .errors import MangroveError
from .kord import KAPPA, OMEGA, ZERO, omega_pow, parse
from .verdict import _plain

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(doc):
    return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"


def _load_json(path):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not JSON ({exc})") from None


def _load_term(path):
    return cond.from_doc(_load_json(path))


def _load_aprime(path):
    from .universal import APrime
    return APrime.loads(_read(path))


def _ord_arg(text):
    try:
        return parse(text)
    except MangroveError as exc:
        raise UsageError(f"bad ordinal {text!r}: {exc}") from None


# subcommands -------------------------------------------------------------------

def cmd_build(args):
    _write(args, cond.dumps(_load_term(args.term)))
    return EXIT_OK


def cmd_query(args):
    p = _load_term(args.term)
    vals = [_ord_arg(v) for v in args.args]
    need = {"theta": 1, "contains": 2, "tree": 4, "pi": 4, "f": 1}[args.what]
    if len(vals) != need:
        raise UsageError(f"query {args.what} takes {need} ordinals, got {len(vals)}")
    if args.what == "theta":
        ans = {"level": vals[0], "theta": p.theta(vals[0])}
    elif args.what == "contains":
        ans = {"node": Node(*vals), "contains": p.contains(Node(*vals))}
    elif args.what == "tree":
        x, y = Node(*vals[:2]), Node(*vals[2:])
        ans = {"x": x, "y": y, "related": p.tree_rel(x, y)}
    elif args.what == "pi":
        x, y = Node(*vals[:2]), Node(*vals[2:])
        ans = {"x": x, "y": y, "map": p.pi_map(x, y).to_doc()}
    else:
        ans = {"nu": vals[0], "f": p.f_apply(vals[0])}
    _write(args, _json(ans))
    return EXIT_OK


def cmd_check(args):
    from .verify import Fragment, check_condition, check_fragment
    doc = _load_json(args.file)
    if isinstance(doc, dict) and "nodes" in doc:
        reports = [check_fragment(Fragment.from_doc(doc))]
    else:
        p = cond.from_doc(doc)
        reports = [check_condition(p, args.budget, args.seed)]
        if args.aprime:
            from .universal import check_universal
            reports.append(check_universal(p, _load_aprime(args.aprime), args.budget, args.seed))
    if len(reports) == 1:
        _write(args, reports[0].dumps())
    else:
        _write(args, _json({"reports": [r.to_doc() for r in reports]}))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def _range(text):
    lo, sep, hi = text.partition("..")
    if not sep:
        raise UsageError(f"--range expects lo..hi, got {text!r}")
    return _ord_arg(lo), _ord_arg(hi)


def cmd_code(args):
    from .morcode import code_dump, positions_in_range
    p = _load_term(args.term)
    lo, hi = _range(args.range)
    _write(args, code_dump(p, positions_in_range(lo, hi, args.limit), args.show_undefined))
    return EXIT_OK


def cmd_simulate(args):
    from .sim import load_script, run
    script = load_script(_read(args.script))
    aprime = _load_aprime(args.aprime) if args.aprime else None
    if args.mode == "universal" and aprime is None:
        raise UsageError("--mode universal needs --aprime")
    start = _load_term(args.start) if args.start else None
    r = run(script, args.mode, aprime, start, args.budget, args.seed)
    _write(args, r.dumps())
    return EXIT_OK


def cmd_patch(args):
    from .homog import patch
    from .sim import Run
    r = Run.loads(_read(args.run))
    out = patch(r, _load_term(args.term), args.budget, args.seed)
    _write(args, out.dumps())
    return EXIT_OK


def _default_levels(p):
    levels = {ZERO, OMEGA, omega_pow(2), omega_pow(OMEGA), p.lam}
    levels.update(p.boundaries())
    return {a for a in levels if a <= p.lam} | {KAPPA}


def cmd_export(args):
    from .sim import Run, limit_fragment
    from .verify import extract_fragment, fragment_to_dot
    doc = _load_json(args.file)
    max_order = _ord_arg(args.max_order)
    extra = [_ord_arg(a) for a in args.levels.split(",")] if args.levels else []
    if isinstance(doc, dict) and "steps" in doc:
        frag = limit_fragment(Run.from_doc(doc), max_order, args.max_nodes, args.per_block, extra)
    else:
        p = cond.from_doc(doc)
        levels = set(extra) if extra else _default_levels(p)
        frag = extract_fragment(p, levels, max_order, args.max_nodes, args.per_block)
    _write(args, fragment_to_dot(frag) if args.dot else frag.dumps())
    return EXIT_OK


# argument parsing ------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="mangrove", description="Morass conditions at desk scale.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, seeded=False):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="write here instead of stdout")
        if seeded:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--budget", type=int, default=2000)
        return sp

    sp = add("build", cmd_build, "validate a term file and print it canonically")
    sp.add_argument("term")

    sp = add("query", cmd_query, "ask a condition about one node or level")
    sp.add_argument("term")
    sp.add_argument("what", choices=["theta", "contains", "tree", "pi", "f"])
    sp.add_argument("args", nargs="*", metavar="ORD")

    sp = add("check", cmd_check, "check a term or fragment file", seeded=True)
    sp.add_argument("file")
    sp.add_argument("--aprime", help="also check the universal requirements for this A' file")

    sp = add("code", cmd_code, "dump the morass code over a range of positions")
    sp.add_argument("term")
    sp.add_argument("--range", required=True, metavar="LO..HI")
    sp.add_argument("--show-undefined", action="store_true")
    sp.add_argument("--limit", type=int, default=100000, help="maximum number of positions")

    sp = add("simulate", cmd_simulate, "build a run from a goal script", seeded=True)
    sp.add_argument("script")
    sp.add_argument("--mode", choices=["plain", "universal"], default="plain")
    sp.add_argument("--aprime")
    sp.add_argument("--start", help="term file to start from (default: bamboo)")

    sp = add("patch", cmd_patch, "move a run so that it passes below a condition", seeded=True)
    sp.add_argument("run")
    sp.add_argument("term")

    sp = add("export", cmd_export, "extract a fragment of a term or of a run's final condition")
    sp.add_argument("file")
    sp.add_argument("--dot", action="store_true")
    sp.add_argument("--levels", help="comma-separated levels (k for the top level)")
    sp.add_argument("--max-order", default="w*3")
    sp.add_argument("--max-nodes", type=int, default=4096)
    sp.add_argument("--per-block", type=int, default=2)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MangroveError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"mangrove {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
