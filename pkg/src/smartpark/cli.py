"""Command line interface: ``park check | simulate | store dump``."""

from __future__ import annotations

import argparse
import logging
import sys

from .formula import ParseError, parse, render
from .knowledge import StoreError, load_store
from .simulation import InputError, run_simulation
from .tableau import DepthExceeded, Verdict, decide, render_tree

EXIT_OK = 0
EXIT_UNSAT = 1
EXIT_ERROR = 2


def _cmd_check(args) -> int:
    f = parse(args.formula)
    if args.valid:
        result = decide(~f, args.depth)
        valid = result.verdict is Verdict.UNSAT
        print("VALID" if valid else "NOT VALID")
        print(render_tree(result.tree))
        return EXIT_OK if valid else EXIT_UNSAT
    result = decide(f, args.depth)
    print(result.verdict.value.upper())
    print(render_tree(result.tree))
    return EXIT_OK if result.verdict is Verdict.SAT else EXIT_UNSAT


def _cmd_simulate(args) -> int:
    result = run_simulation(
        args.topology, args.trace, args.store_out, args.log, args.store_in, args.depth
    )
    print(
        f"{len(result.log)} decisions, {result.entered} entered, "
        f"{result.exited} exited, {result.present} still parked, "
        f"{len(result.store)} store entries"
    )
    return EXIT_OK


def format_table(store) -> str:
    rows = sorted(store, key=lambda e: (e.id, -e.count, render(e.formula)))
    table = [("id", "formula", "r")] + [(e.id, render(e.formula), str(e.count)) for e in rows]
    w0 = max(len(r[0]) for r in table)
    w1 = max(len(r[1]) for r in table)
    return "\n".join(f"{a:<{w0}}  {b:<{w1}}  {c:>3}".rstrip() for a, b, c in table)


def _cmd_store_dump(args) -> int:
    print(format_table(load_store(args.file)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="park", description="Smart car park reasoning tools.")
    p.add_argument("-v", "--verbose", action="store_true", help="log agent decisions to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide a PLTL formula with semantic tableaux")
    c.add_argument("--valid", action="store_true", help="check validity instead of satisfiability")
    c.add_argument("--depth", type=int, default=None, help="state bound per branch")
    c.add_argument("formula")
    c.set_defaults(func=_cmd_check)

    s = sub.add_parser("simulate", help="replay a presence trace through the agents")
    s.add_argument("--topology", required=True)
    s.add_argument("--trace", required=True)
    s.add_argument("--store-in")
    s.add_argument("--store-out", required=True)
    s.add_argument("--log", required=True)
    s.add_argument("--depth", type=int, default=None)
    s.set_defaults(func=_cmd_simulate)

    st = sub.add_parser("store", help="inspect a store of learned formulas")
    st_sub = st.add_subparsers(dest="store_command", required=True)
    d = st_sub.add_parser("dump", help="print a store as a table")
    d.add_argument("file")
    d.set_defaults(func=_cmd_store_dump)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ParseError, StoreError, InputError, DepthExceeded, OSError, ValueError) as exc:
        print(f"park: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
