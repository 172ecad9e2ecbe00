"""Command line: strata run | list-facts | oracle."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from ..hgring import HGError
from ..spectral import diff_grids, format_grid, parse_grid
from .emit import emit
from .parser import ScenarioError, parse_file
from .replay import ReplayAssertion, replay

LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("STRATA_LOG", "quiet").lower()
    logging.basicConfig(level=LEVELS.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def _resolve(path: str) -> str:
    # bare names fall back to the shipped scenarios
    if os.path.exists(path):
        return path
    from . import data_path
    cand = data_path(path)
    if os.path.exists(cand):
        return cand
    return path


def cmd_run(args) -> int:
    doc = parse_file(_resolve(args.file))
    try:
        report = replay(doc, strict=args.strict)
    except ReplayAssertion as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 2
    if args.grid:
        if args.grid not in report.outputs:
            print(f"error: no output named {args.grid}", file=sys.stderr)
            return 1
        grids = [c.value for c in report.outputs[args.grid]]
        if args.diff:
            with open(args.diff, encoding="utf-8") as fh:
                expected = parse_grid(fh.read())
            bad = False
            for g in grids:
                lines = diff_grids(g, expected)
                bad = bad or bool(lines)
                print("\n".join(lines) if lines else "grids agree")
            return 2 if bad else 0
        for g in grids:
            sys.stdout.write(format_grid(g))
        return 0
    if args.diff:
        print("error: --diff needs --grid NAME", file=sys.stderr)
        return 1
    sys.stdout.buffer.write(emit(report, args.emit))
    sys.stdout.flush()
    return 0 if report.ok else 2


def cmd_list_facts(args) -> int:
    doc = parse_file(_resolve(args.file))
    for f in doc.facts.values():
        from ..hgring import format_poly
        print(f"{f.name} = {format_poly(f.value)}  [{f.kind}] {f.citation}")
    return 0


def cmd_oracle(args) -> int:
    from .. import fqoracle
    res = fqoracle.run_oracle(args.name, args.q, signed=args.signed, conjugate=args.conjugate,
                              jobs=args.jobs)
    print(res.count)
    print(f"predicted {res.predicted}")
    print("MATCH" if res.match else "MISMATCH")
    if res.caveat:
        print(res.caveat)
    return 0 if res.match else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strata", description="Replay discriminant-complement scenarios.")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="replay a scenario file")
    r.add_argument("file")
    r.add_argument("--emit", choices=("text", "json"), default="text")
    r.add_argument("--strict", action="store_true", help="stop at the first failed assertion")
    r.add_argument("--diff", metavar="EXPECTED", help="compare a grid against an expected-grid file")
    r.add_argument("--grid", metavar="NAME", help="print only the named grid")
    r.set_defaults(func=cmd_run)
    lf = sub.add_parser("list-facts", help="list the facts a scenario declares")
    lf.add_argument("file")
    lf.set_defaults(func=cmd_list_facts)
    o = sub.add_parser("oracle", help="brute-force point counts over a finite field")
    o.add_argument("name", choices=("flex-count", "proper-count", "pairs-count", "four-lines-count"))
    o.add_argument("--q", type=int, required=True)
    o.add_argument("--signed", action="store_true")
    o.add_argument("--conjugate", action="store_true", help="proper-count: use a conjugate pair of points")
    o.add_argument("--jobs", type=int, default=1)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, HGError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
