"""Command line interface: ``lambda-bv verify|variation|witness build|sweep|fuzz``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import functional as fn
from . import harness
from . import piecewise as pw
from . import variation as var
from . import waterman as wm
from . import witness as wt


def _write(text: str, dest: str | None) -> None:
    if dest:
        Path(dest).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_verify(args) -> int:
    config = wt.WitnessConfig(n_max=args.levels, p=args.p, seq=wm.parse_sequence(args.sequence))
    sel = fn.SubsequenceSelector.parse(args.selector)
    report = harness.verify_proof(config, sel, args.s_max, seed=args.seed)
    for line in report.lines():
        print(line)
    c = report.counts()
    print(f"{c['pass']} pass, {c['fail']} fail, {c['inconclusive']} inconclusive ({report.wall_time:.2f}s)")
    if args.report:
        Path(args.report).write_text(report.to_json(indent=2))
    return 0 if report.ok else 1


def cmd_variation(args) -> int:
    f = pw.parse(Path(args.function).read_text())
    seq = wm.parse_sequence(args.sequence)
    res = var.variation(f, seq, args.p, method=args.method, max_intervals=args.max_intervals)
    doc = res.to_dict()
    doc["norm"] = {"lower": abs(f(0)) + res.lower, "upper": abs(f(0)) + res.upper}
    print(json.dumps(doc, indent=2))
    return 0


def cmd_witness_build(args) -> int:
    config = wt.WitnessConfig(n_max=args.levels, p=args.p, seq=wm.parse_sequence(args.sequence))
    system = wt.build_system(config)
    _write(json.dumps(system.to_dict()), args.out)
    return 0


def cmd_sweep(args) -> int:
    grid = json.loads(Path(args.grid).read_text())
    rows = harness.sweep_from_grid(grid)
    _write(harness.rows_to_csv(rows), args.csv)
    return 0 if all(r["status"] == "pass" for r in rows) else 1


def cmd_fuzz(args) -> int:
    try:
        stats = harness.fuzz_oracle(args.seed, args.cases, args.max_pieces, fault=args.fault)
    except harness.FuzzViolation as exc:
        print(json.dumps({"violation": exc.reproducer}, indent=2))
        return 1
    print(json.dumps(stats.to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lambda-bv", description="p-Lambda-variation toolkit and witness verifier")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the full inequality chain for one configuration")
    v.add_argument("--sequence", default="ones", help="ones | linear | power:A | custom:FILE")
    v.add_argument("--p", type=float, default=2.0)
    v.add_argument("--levels", type=int, default=6, help="truncation depth n_max of h")
    v.add_argument("--selector", default="identity", help="identity | evens | list:1,3,7")
    v.add_argument("--s-max", type=int, default=8)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--report", help="write the JSON report here")
    v.set_defaults(func=cmd_verify)

    va = sub.add_parser("variation", help="V_(Lambda,p) of a function document")
    va.add_argument("--function", required=True, help="JSON function document")
    va.add_argument("--sequence", default="ones")
    va.add_argument("--p", type=float, default=2.0)
    va.add_argument("--method", choices=["auto", "brute", "spike", "enclosure"], default="auto")
    va.add_argument("--max-intervals", type=int)
    va.set_defaults(func=cmd_variation)

    w = sub.add_parser("witness", help="witness system utilities")
    wsub = w.add_subparsers(dest="action", required=True)
    wb = wsub.add_parser("build", help="emit h, r, J, J' and heights as JSON")
    wb.add_argument("--levels", type=int, default=6)
    wb.add_argument("--p", type=float, default=2.0)
    wb.add_argument("--sequence", default="ones")
    wb.add_argument("--out")
    wb.set_defaults(func=cmd_witness_build)

    s = sub.add_parser("sweep", help="grid of configurations to CSV")
    s.add_argument("--grid", required=True,
                   help='JSON like {"sequences": ["ones"], "p": [2], "levels": [6], "selectors": ["identity"]}')
    s.add_argument("--csv")
    s.set_defaults(func=cmd_sweep)

    fz = sub.add_parser("fuzz", help="random cases against the exhaustive oracle")
    fz.add_argument("--seed", type=int, default=42)
    fz.add_argument("--cases", type=int, default=200)
    fz.add_argument("--max-pieces", type=int, default=6)
    fz.add_argument("--fault", choices=["unsorted_pairing"], help="inject a known bug (negative control)")
    fz.set_defaults(func=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"lambda-bv: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
