"""Command-line entry point: ``pclab <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from . import harness as h
from .errors import PclabError


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--q", type=int, help="base field order (or give --p and --n)")
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--budget-ms", type=int, default=120_000)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", dest="json_out", metavar="OUT.json")
    sp.add_argument("--cache-dir", metavar="DIR")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pclab", description="Clique and character-sum verification for Peisert-type graphs.")
    sub = ap.add_subparsers(dest="command", required=True)

    for name in ("verify-vlm", "verify-mullin", "verify-sziklai", "verify-maximal-peisert"):
        _common(sub.add_parser(name))

    sp = sub.add_parser("verify-gpstar")
    _common(sp)
    sp.add_argument("--count", type=int, help="expected number of maximum cliques containing 0")

    sp = sub.add_parser("verify-maximal-gp", help="F_q maximal in GP(q^N, d)")
    _common(sp)
    sp.add_argument("--N", dest="N", type=int, required=True, help="extension degree over F_q")

    sp = sub.add_parser("cor-improvement")
    _common(sp)
    sp.add_argument("--family", default="paley",
                    choices=["paley", "peisert", "gpaley", "gpeisert", "peisert_type"])
    sp.add_argument("--reps", type=int, nargs="*", help="coset exponents mod q+1 for peisert_type")

    sp = sub.add_parser("charsum")
    _common(sp)
    sp.add_argument("kind", choices=["katz", "reis", "charsumcor", "primecor"])
    sp.add_argument("--N", dest="N", type=int)
    sp.add_argument("--t", type=int, help="affine dimension for reis")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--char-samples", type=int)
    sp.add_argument("--csv", dest="csv_path")

    sp = sub.add_parser("epsilon")
    _common(sp)
    sp.add_argument("--points", nargs="+", help="complex numbers such as 1 1j -0.5+0.8j")

    sp = sub.add_parser("directions")
    _common(sp)
    sp.add_argument("mode", choices=["ball", "cliques", "extension"])
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--family", default="paley", choices=["paley", "peisert", "gpaley", "gpeisert"])

    sp = sub.add_parser("stability")
    _common(sp)
    sp.add_argument("--family", default="paley", choices=["paley", "peisert", "gpaley", "gpeisert"])
    return ap


def _q(args) -> int:
    if args.q is not None:
        return args.q
    if args.p is not None:
        return args.p ** (args.n or 1)
    raise ValueError("give --q or --p [--n]")


def dispatch(args) -> dict:
    kw = dict(budget_ms=args.budget_ms, threads=args.threads, seed=args.seed, cache_dir=args.cache_dir)
    c = args.command
    if c == "epsilon":
        if args.d is None and not args.points:
            raise ValueError("epsilon needs --d or --points")
        return h.cmd_epsilon(d=args.d, points=[complex(z) for z in args.points] if args.points else None, **kw)
    q = _q(args)
    if c == "verify-vlm":
        return h.cmd_verify_vlm(q, **kw)
    if c == "verify-mullin":
        return h.cmd_verify_mullin(q, **kw)
    if c == "verify-sziklai":
        return h.cmd_verify_sziklai(q, args.d, **kw)
    if c == "verify-gpstar":
        return h.cmd_verify_gpstar(q, args.d, args.count, **kw)
    if c == "verify-maximal-peisert":
        return h.cmd_verify_maximal_peisert(q, **kw)
    if c == "verify-maximal-gp":
        return h.cmd_verify_maximal_gp(q, args.N, args.d, **kw)
    if c == "cor-improvement":
        return h.cmd_cor_improvement(q, args.family, args.d, args.reps, **kw)
    if c == "charsum":
        return h.cmd_charsum(args.kind, q, N=args.N, t=args.t, samples=args.samples,
                             char_samples=args.char_samples, csv_path=args.csv_path, **kw)
    if c == "directions":
        return h.cmd_directions(q, args.mode, args.samples, args.family, args.d, **kw)
    if c == "stability":
        return h.cmd_stability(q, args.family, args.d, **kw)
    raise ValueError(f"unknown command {c}")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else h.EXIT_USAGE
    try:
        report = dispatch(args)
    except (PclabError, ValueError) as exc:
        print(f"pclab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return h.EXIT_USAGE
    text = json.dumps(report, indent=2)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text + "\n")
    m = report["metrics"]
    print(f"{report['command']}: {report['verdict']}  omega={m.get('omega')}  counts={m.get('counts')}")
    for note in report["notes"]:
        print(f"  note: {note}")
    for key, adv in report.get("advisory", {}).items():
        where = "inside" if adv["inside_guaranteed_regime"] else "outside"
        print(f"  advisory: p={adv['p']} vs {adv['name']} = {adv['threshold']:.2f} ({where} guaranteed regime)")
    return h.EXIT_CODES[report["verdict"]]


if __name__ == "__main__":
    sys.exit(main())
