"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 budget
exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import checks
from .combinatorics import idempotent_counts, rank_formulas, sandwich_counts
from .errors import BudgetExceeded, SandwichError, VerificationFailure, enumeration_budget
from .field import parse_field
from .generators import genset, necessity_check
from .sandwich import (
    classify_iso,
    context_from_rank,
    eggbox,
    make_context,
    maximal_dclasses,
    regular_elements,
    regular_mask,
    verify_witness,
)
from .textio import format_matrices, read_matrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- context


def _context(args):
    if (args.rank is None) == (args.sandwich_file is None):
        raise UsageError("give exactly one of --rank and --sandwich-file")
    if args.sandwich_file is not None:
        field = parse_field(args.q) if args.q else None
        A = read_matrix(args.sandwich_file, field)
        n, m = A.shape
        if (args.m is not None and args.m != m) or (args.n is not None and args.n != n):
            raise UsageError(f"sandwich file holds a {n}x{m} matrix, which needs m={m}, n={n}")
        return make_context(A.field, m, n, A)
    if args.q is None or args.m is None or args.n is None:
        raise UsageError("--q, --m and --n are required with --rank")
    return context_from_rank(parse_field(args.q), args.m, args.n, args.rank)


def parse_spec(text: str):
    """Context from "q=2,m=2,n=2,rank=0" (or "sandwich=path" instead of rank)."""
    opts = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        if not sep:
            raise UsageError(f"bad context spec {text!r}")
        opts[key.strip()] = val.strip()
    ns = argparse.Namespace(
        q=opts.get("q"),
        m=int(opts["m"]) if "m" in opts else None,
        n=int(opts["n"]) if "n" in opts else None,
        rank=int(opts["rank"]) if "rank" in opts else (int(opts["r"]) if "r" in opts else None),
        sandwich_file=opts.get("sandwich"),
    )
    return _context(ns)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _try(fn, *a):
    try:
        return fn(*a)
    except SandwichError as exc:
        return f"n/a ({exc})"


# ---------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    ctx = _context(args)
    q, m, n, r = ctx.q, ctx.m, ctx.n, ctx.r
    report = {
        "params": {"field": ctx.field.literal, **ctx.params()},
        "normalized": ctx.normalized,
        "size": ctx.size,
        "regular_formula": sandwich_counts(q, m, n, r, 0)["P_size"],
        "idempotents_formula": idempotent_counts(q, m, n, r),
        "dclasses": [],
        "maximal": maximal_dclasses(ctx),
        "ranks": {t: _try(rank_formulas, q, m, n, r, t) for t in ["full", "reg", "idem"] + [f"ideal:{s}" for s in range(r)]},
    }
    if r == 0:
        report["note"] = "zero semigroup: every product is O"
    for s in range(r + 1):
        c = sandwich_counts(q, m, n, r, s)
        report["dclasses"].append({"s": s, "nR": c["nR"], "nL": c["nL"], "hSize": c["H_size"], "size": c["D_size"],
                                   "idempotents": idempotent_counts(q, m, n, r, s)})
    budget = enumeration_budget(args.budget)
    if ctx.size <= budget:
        report["regular_enumerated"] = int(regular_mask(ctx, ctx.all_elements(budget)).sum())
    if report["regular_formula"] <= budget:
        report["idempotents_enumerated"] = len(regular_elements(ctx, idempotent_only=True, budget=budget))
    if args.format == "json":
        _emit(args, json.dumps(report, indent=2) + "\n")
    else:
        _emit(args, _analyze_text(report))
    return EXIT_OK


def _analyze_text(rep: dict) -> str:
    p = rep["params"]
    lines = [f"sandwich semigroup over GF({p['q']}) [{p['field']}], {p['m']}x{p['n']} matrices, sandwich rank {p['r']}",
             f"size {rep['size']}"]
    if "note" in rep:
        lines.append(rep["note"])
    reg = f"regular elements {rep['regular_formula']} (formula)"
    if "regular_enumerated" in rep:
        reg += f", {rep['regular_enumerated']} (enumerated)"
    lines.append(reg)
    idem = f"idempotents {rep['idempotents_formula']} (formula)"
    if "idempotents_enumerated" in rep:
        idem += f", {rep['idempotents_enumerated']} (enumerated)"
    lines.append(idem)
    lines.append("regular D-classes:")
    for d in rep["dclasses"]:
        lines.append(f"  rank {d['s']}: {d['nR']} R-classes x {d['nL']} L-classes, H-classes of size {d['hSize']}, "
                     f"{d['size']} elements, {d['idempotents']} idempotents")
    mx = rep["maximal"]
    lines.append(f"maximal D-classes: {mx['kind']}, count {mx['count']}")
    lines.append("ranks:")
    for t, v in rep["ranks"].items():
        lines.append(f"  {t}: {v}")
    return "\n".join(lines) + "\n"


def cmd_eggbox(args) -> int:
    ctx = _context(args)
    rep = eggbox(ctx, args.scope, budget=args.budget)
    _emit(args, rep.render(args.format))
    return EXIT_OK


def cmd_verify(args) -> int:
    grid = checks.parse_grid(args.grid) if args.grid else checks.default_grid()
    groups = [g.strip() for g in args.only.split(",")] if args.only else None
    try:
        results = checks.run_checks(groups, grid, threads=args.threads, mutate=args.mutate)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        _emit(args, checks.results_json(results))
    else:
        lines = [f"{'PASS' if r.ok else 'FAIL'} [{r.criterion}] {r.group} {r.instance}" for r in results]
        lines.append(f"{sum(r.ok for r in results)} passed, {sum(not r.ok for r in results)} failed")
        _emit(args, "\n".join(lines) + "\n")
    failed = [r for r in results if not r.ok]
    for r in failed[:5]:
        print(f"counterexample: {json.dumps(checks._jsonable(r.as_dict()))}", file=sys.stderr)
    if any(r.detail.get("error") == "BudgetExceeded" for r in failed):
        return EXIT_BUDGET
    return EXIT_FAIL if failed else EXIT_OK


def cmd_generators(args) -> int:
    ctx = _context(args)
    rep = genset(ctx, args.target, budget=args.budget)
    nec = necessity_check(ctx, args.target, rep, budget=args.budget) if args.necessity else None
    if args.format == "json":
        body = rep.as_dict()
        if nec is not None:
            body["necessity"] = nec
        _emit(args, json.dumps(body, indent=2) + "\n")
    else:
        head = [
            f"# target {rep.target} for q={ctx.q} m={ctx.m} n={ctx.n} r={ctx.r}",
            f"# size {rep.claimed_size}, formula {rep.formula_size}",
            f"# closure {rep.closure_size} of target {rep.target_size}, certified {rep.certified}",
            f"# minimality: {rep.minimality}",
        ]
        if rep.gl_path:
            head.append(f"# general linear generators: {rep.gl_path}")
        if nec is not None:
            head.append(f"# necessity check: {'ok' if nec['ok'] else 'FAILED'} ({nec['runs']} closures)")
        _emit(args, "\n".join(head) + "\n\n" + format_matrices(rep.generators) + "\n")
    return EXIT_OK if rep.certified else EXIT_FAIL


def cmd_classify(args) -> int:
    left, right = parse_spec(args.left), parse_spec(args.right)
    res = classify_iso(left, right, budget=args.budget)
    body = res.as_dict()
    if res.mapping is not None and args.check_witness:
        ok, why = verify_witness(left, right, res.mapping)
        body["witness_check"] = why
        if not ok:
            _emit(args, json.dumps(body, indent=2) + "\n")
            return EXIT_FAIL
    if args.format == "json":
        _emit(args, json.dumps(body, indent=2) + "\n")
    else:
        verdict = "isomorphic" if res.isomorphic else "not isomorphic"
        lines = [f"{verdict}: {res.reason}"]
        if res.witness:
            lines.append(f"witness: {res.witness}, {body['witness_size']} elements")
        if "witness_check" in body:
            lines.append(f"witness check: {body['witness_check']}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_formulas(args) -> int:
    if args.q is None or args.m is None or args.n is None or args.rank is None:
        raise UsageError("formulas needs --q, --m, --n and --rank")
    q = parse_field(args.q).q
    m, n, r = args.m, args.n, args.rank
    body = {
        "params": {"q": q, "m": m, "n": n, "r": r},
        "regular": sandwich_counts(q, m, n, r, 0)["P_size"],
        "idempotents": idempotent_counts(q, m, n, r),
        "dclasses": [sandwich_counts(q, m, n, r, s) | {"s": s, "idempotents": idempotent_counts(q, m, n, r, s)}
                     for s in range(r + 1)],
        "ranks": {t: _try(rank_formulas, q, m, n, r, t) for t in ["full", "reg", "idem"] + [f"ideal:{s}" for s in range(r)]},
    }
    if args.format == "json":
        _emit(args, json.dumps(body, indent=2) + "\n")
    else:
        lines = [f"q={q} m={m} n={n} r={r}", f"regular {body['regular']}", f"idempotents {body['idempotents']}"]
        for d in body["dclasses"]:
            lines.append("  " + " ".join(f"{k}={v}" for k, v in d.items() if k != "P_size"))
        for t, v in body["ranks"].items():
            lines.append(f"rank {t}: {v}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_context(p, formats=("text", "json")):
    p.add_argument("--q", help="field: p, p^k, p^k/c0,...,ck or a prime power")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--rank", type=int, help="use the normal-form sandwich matrix of this rank")
    p.add_argument("--sandwich-file", help="read the n x m sandwich matrix from a file")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, help="enumeration budget (default from SANDWICH_BUDGET or 2^20)")
    common.add_argument("--threads", type=int, default=1)
    parser = argparse.ArgumentParser(prog="sandwichmat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="summary of one sandwich semigroup")
    _add_context(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("eggbox", parents=[common], help="eggbox diagrams")
    _add_context(p, ("text", "json", "dot", "csv"))
    p.add_argument("--scope", default="reg", help="all, reg, dclass:s or mdclass:s")
    p.set_defaults(func=cmd_eggbox)

    p = sub.add_parser("verify", parents=[common], help="formula-versus-enumeration sweep")
    p.add_argument("--grid", help='"q=2,3;dim=3;size=1024" or "q:m:n:r,..."')
    p.add_argument("--only", help="comma-separated check groups: " + ",".join(checks.GROUPS))
    p.add_argument("--mutate", action="store_true", help="tamper with formulas to exercise the failure path")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generators", parents=[common], help="certified generating set")
    _add_context(p)
    p.add_argument("--target", default="full", help="full, reg, idem or ideal:s")
    p.add_argument("--necessity", action="store_true", help="also run the necessity check")
    p.set_defaults(func=cmd_generators)

    p = sub.add_parser("classify", parents=[common], help="isomorphism test between two sandwich semigroups")
    p.add_argument("--left", required=True, help='e.g. "q=2,m=2,n=2,rank=0"')
    p.add_argument("--right", required=True)
    p.add_argument("--no-check-witness", dest="check_witness", action="store_false")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("formulas", parents=[common], help="closed-form counts only")
    _add_context(p)
    p.set_defaults(func=cmd_formulas)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.budget is not None:
        if args.budget <= 0:
            print("error: --budget must be positive", file=sys.stderr)
            return EXIT_USAGE
        os.environ["SANDWICH_BUDGET"] = str(args.budget)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except VerificationFailure as exc:
        print(f"verification failed: {exc}; witness {exc.witness}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, SandwichError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
