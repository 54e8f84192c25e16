"""Formula-versus-enumeration checks over a grid of small instances.

Each check compares a structural or closed-form answer with an independent
computation (multiplication tables, brute scans, closures) and returns a
CheckResult. The `verify` command and the acceptance tests both run these.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .combinatorics import gl_order, idempotent_counts, mmn_dclass_counts, q_binomial, rank_formulas, sandwich_counts
from .errors import SandwichError
from .field import make_field
from .generators import closure, closure_codes, genset, gl_genset, idempotent_ideal_generators, necessity_check
from .matrix import Matrix, all_matrices, batch_col_key_codes, batch_encode, batch_matmul, batch_rank, batch_row_key_codes
from .psgp import MatrixCategory, brute_green, build_sandwich, same_partition, _partition_witness
from .sandwich import (
    classify_iso,
    context_from_rank,
    eggbox,
    green_labels,
    hhat_structure,
    make_context,
    man_congruence_check,
    mididentity_check,
    pullback_check,
    regular_elements,
    regular_mask,
    regularity_preserving,
    verify_witness,
)
from .sandwich.context import SandwichContext

__all__ = [
    "CheckResult",
    "GROUPS",
    "default_grid",
    "parse_grid",
    "run_checks",
    "results_json",
    "scrambled_context",
]


@dataclass
class CheckResult:
    criterion: int
    group: str
    instance: str
    ok: bool
    detail: dict = dc_field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"criterion": self.criterion, "group": self.group, "instance": self.instance,
                "ok": self.ok, "detail": self.detail}


Instance = tuple  # (q, m, n, r)


def _name(inst: Instance) -> str:
    q, m, n, r = inst
    return f"q={q} m={m} n={n} r={r}"


def default_grid(qs=(2, 3), max_dim: int = 3, max_size: int = 1024) -> list[Instance]:
    out = []
    for q in qs:
        for m in range(1, max_dim + 1):
            for n in range(1, max_dim + 1):
                if q ** (m * n) > max_size:
                    continue
                for r in range(min(m, n) + 1):
                    out.append((q, m, n, r))
    return out


def parse_grid(text: str) -> list[Instance]:
    """"q=2,3;dim=3;size=1024" style options, or an explicit list "2:2:3:1,3:2:2:1"."""
    text = text.strip()
    if not text or text == "default":
        return default_grid()
    if ":" in text and "=" not in text:
        return [tuple(int(v) for v in item.split(":")) for item in text.split(",")]
    opts = {}
    for part in text.split(";"):
        key, _, val = part.partition("=")
        opts[key.strip()] = val.strip()
    qs = tuple(int(v) for v in opts.get("q", "2,3").split(","))
    return default_grid(qs, int(opts.get("dim", 3)), int(opts.get("size", 1024)))


# ---------------------------------------------------------------- contexts


@lru_cache(maxsize=None)
def _field(q: int):
    p, k = q, 1
    for base in range(2, q + 1):
        if q % base == 0:
            p = base
            break
    while p ** k < q:
        k += 1
    return make_field(p, k)


def scrambled_context(q: int, m: int, n: int, r: int, seed: int = 7) -> SandwichContext:
    """A context whose sandwich matrix is J conjugated by fixed random invertibles."""
    F = _field(q)
    rng = np.random.default_rng(seed + 1000 * m + 100 * n + 10 * r + q)

    def invertible(k):
        while True:
            X = rng.integers(0, q, size=(k, k))
            if batch_rank(F, X[None])[0] == k:
                return X

    J = np.zeros((n, m), dtype=np.int64)
    J[:r, :r] = np.eye(r, dtype=np.int64)
    A = batch_matmul(F, batch_matmul(F, invertible(n), J), invertible(m))
    return make_context(F, m, n, Matrix(F, A, shape=(n, m)))


@lru_cache(maxsize=None)
def _brute(inst: Instance):
    q, m, n, r = inst
    ctx = scrambled_context(q, m, n, r)
    S = MatrixCategory(ctx.field, sorted({m, n}))
    tab = build_sandwich(S, m, n, S.index(ctx.A))
    return ctx, brute_green(tab.table)


def _jctx(inst: Instance) -> SandwichContext:
    q, m, n, r = inst
    return context_from_rank(_field(q), m, n, r)


# ---------------------------------------------------------------- criteria


def check_green(inst: Instance, mutate: bool = False) -> CheckResult:
    ctx, g = _brute(inst)
    X = ctx.all_elements()
    detail, ok = {}, True
    for kind in ("R", "L", "H", "D", "J"):
        lab = green_labels(ctx, kind, X)
        if mutate and kind == "R":
            lab = lab.copy()
            lab[-1] = lab.max() + 1
        same = same_partition(lab, getattr(g, kind))
        detail[kind] = same
        if not same:
            ok = False
            detail[f"{kind}_witness"] = _partition_witness(lab, getattr(g, kind))
    reg = regular_mask(ctx, X)
    detail["regular"] = bool(np.array_equal(reg, g.regular))
    if not detail["regular"]:
        ok = False
        detail["regular_witness"] = int(np.nonzero(reg != g.regular)[0][0])
    return CheckResult(1, "green", _name(inst), ok, detail)


def check_eggbox_fixed() -> CheckResult:
    ctx = context_from_rank(_field(3), 2, 3, 1)
    d = eggbox(ctx, "mdclass:1").dclasses[0]
    detail = {"nR": d.nR, "nL": d.nL, "hSizes": d.h_sizes, "size": d.size}
    ok = d.nR == 4 and d.nL == 13 and d.h_sizes == [2] and d.size == 104
    counts = mmn_dclass_counts(3, 2, 3, 1)
    ok &= (counts["nR"], counts["nL"], counts["hSize"], counts["size"]) == (4, 13, 2, 104)
    return CheckResult(2, "eggbox", "q=3 m=2 n=3 mdclass:1", ok, detail)


def check_eggbox(inst: Instance) -> CheckResult:
    q, m, n, r = inst
    rep = eggbox(_jctx(inst), "reg")
    ok, rows = True, []
    for d in rep.dclasses:
        c = sandwich_counts(q, m, n, r, d.s)
        row = [d.s, d.nR, d.nL, d.h_sizes, d.size]
        rows.append(row)
        ok &= (d.nR, d.nL, d.h_sizes, d.size) == (c["nR"], c["nL"], [c["H_size"]], c["D_size"])
    # the regular D-classes form a chain
    ok &= rep.order == [(i, i + 1) for i in range(len(rep.dclasses) - 1)]
    return CheckResult(2, "eggbox", _name(inst), bool(ok), {"classes": rows, "order": rep.order})


def check_counts(inst: Instance, mutate: bool = False) -> CheckResult:
    q, m, n, r = inst
    ctx, g = _brute(inst)
    X = ctx.all_elements()
    ranks = batch_rank(ctx.field, X)
    formula_P = sandwich_counts(q, m, n, r, 0)["P_size"] + (1 if mutate else 0)
    detail = {"P_formula": formula_P, "P_scan": int(g.regular.sum())}
    ok = detail["P_formula"] == detail["P_scan"]
    per = []
    for s in range(r + 1):
        c = sandwich_counts(q, m, n, r, s)
        idx = np.nonzero(g.regular & (ranks == s))[0]
        R, L, H = (np.unique(getattr(g, k)[idx], return_counts=True) for k in ("R", "L", "H"))
        seen = {
            "D_size": len(idx),
            "nD": len(np.unique(g.D[idx])),
            "nR": len(R[0]), "nL": len(L[0]), "nH": len(H[0]),
            "R_size": sorted(set(R[1].tolist())), "L_size": sorted(set(L[1].tolist())),
            "H_size": sorted(set(H[1].tolist())),
        }
        # classes of regular elements must not leak outside the rank-s layer
        full_R = np.isin(g.R, R[0]).sum() == len(idx)
        good = (seen["D_size"] == c["D_size"] and seen["nD"] == 1 and full_R
                and seen["nR"] == c["nR"] and seen["nL"] == c["nL"] and seen["nH"] == c["nH"]
                and seen["R_size"] == [c["R_size"]] and seen["L_size"] == [c["L_size"]]
                and seen["H_size"] == [c["H_size"]])
        per.append({"s": s, "ok": bool(good), **seen})
        ok &= good
    detail["per_rank"] = per
    return CheckResult(3, "counts", _name(inst), bool(ok), detail)


def check_idempotents(inst: Instance) -> CheckResult:
    q, m, n, r = inst
    ctx = _jctx(inst)
    F = ctx.field
    X = ctx.all_elements()
    scan = X[batch_encode(F, ctx.star_array(X, X)) == batch_encode(F, X)]
    scan_ranks = batch_rank(F, scan)
    param = regular_elements(ctx, idempotent_only=True)
    ok = bool(np.array_equal(batch_encode(F, param), np.sort(batch_encode(F, scan))))
    per = []
    for s in range(r + 1):
        f = idempotent_counts(q, m, n, r, s)
        b = int((scan_ranks == s).sum())
        per.append({"s": s, "formula": f, "scan": b})
        ok &= f == b
    # idempotents of M_r by rank
    As = all_matrices(F, r, r)
    idem_A = As[batch_encode(F, batch_matmul(F, As, As)) == batch_encode(F, As)]
    ra = batch_rank(F, idem_A)
    mr = [{"s": s, "formula": idempotent_counts(q, m, n, r, s, square=True), "scan": int((ra == s).sum())}
          for s in range(r + 1)]
    ok &= all(d["formula"] == d["scan"] for d in mr)
    return CheckResult(4, "idempotents", _name(inst), bool(ok),
                       {"total": len(scan), "per_rank": per, "M_r": mr})


def check_idempotent_closure(inst: Instance) -> CheckResult:
    ctx = _jctx(inst)
    F, r = ctx.field, ctx.r
    E = regular_elements(ctx, idempotent_only=True)
    lower = [regular_elements(ctx, s) for s in range(r)]
    top = regular_elements(ctx, r, idempotent_only=True)
    target = np.sort(batch_encode(F, np.concatenate(lower + [top])))
    cl = closure(ctx, E, target)
    return CheckResult(5, "closure", _name(inst), bool(cl.matches),
                       {"idempotents": len(E), "closure": cl.size, "target": len(target)})


def _targets(inst: Instance) -> list[str]:
    q, m, n, r = inst
    if r == m == n:
        return []
    if r == 0:
        return ["full"]
    return ["full", "reg", "idem"] + [f"ideal:{s}" for s in range(r)]


def check_gensets(inst: Instance, mutate: bool = False) -> CheckResult:
    q, m, n, r = inst
    ctx = _jctx(inst)
    F = ctx.field
    rows, ok = [], True
    for target in _targets(inst):
        rep = genset(ctx, target)
        formula = rank_formulas(q, m, n, r, target) + (1 if mutate else 0)
        nec = necessity_check(ctx, target, rep)
        idem_ok = True
        if target != "full" and target != "reg":
            G = np.stack([X.array for X in rep.generators])
            idem_ok = bool(np.array_equal(batch_encode(F, ctx.star_array(G, G)), batch_encode(F, G)))
        good = (rep.claimed_size == formula and rep.closure_size == rep.target_size
                and bool(rep.certified) and nec["ok"] and idem_ok)
        rows.append({"target": target, "size": rep.claimed_size, "formula": formula,
                     "closure": rep.closure_size, "target_size": rep.target_size,
                     "necessity": nec["ok"], "idempotent": idem_ok, "gl_path": rep.gl_path, "ok": bool(good)})
        ok &= good
    return CheckResult(6, "gensets", _name(inst), bool(ok), {"targets": rows})


def _hclass_reps(F, r: int, s: int) -> np.ndarray:
    As = all_matrices(F, r, r)
    As = As[batch_rank(F, As) == s]
    keys = np.stack([batch_col_key_codes(F, As), batch_row_key_codes(F, As)], axis=1)
    _, first = np.unique(keys, axis=0, return_index=True)
    return As[np.sort(first)]


def check_inflation(inst: Instance) -> CheckResult:
    q, m, n, r = inst
    ctx = _jctx(inst)
    F = ctx.field
    ok, rows = True, []
    for s in range(r + 1):
        expect_n = q ** (s * (m + n - 2 * r))
        expect_h = gl_order(q, s)
        reps = _hclass_reps(F, r, s)
        bad = 0
        for A in reps:
            X = np.zeros((m, n), dtype=np.int64)
            X[:r, :r] = A
            rep = hhat_structure(ctx, ctx.matrix(X))
            good = (rep.n_hclasses == expect_n and rep.hclass_sizes == [expect_h] and rep.verdict_ok
                    and rep.phi_injective and rep.rect_ok in (None, True)
                    and rep.size == expect_n * expect_h)
            bad += not good
        rows.append({"s": s, "hhat_classes": len(reps), "expected_hclasses": expect_n, "failures": bad})
        ok &= bad == 0 and len(reps) == q_binomial(q, r, s) ** 2
    return CheckResult(7, "inflation", _name(inst), bool(ok), {"per_rank": rows})


def check_pullback(inst: Instance) -> CheckResult:
    q, m, n, r = inst
    if r == 0:
        return CheckResult(8, "pullback", _name(inst), True, {"note": "P = {O}"})
    ctx = _jctx(inst)
    pb = pullback_check(ctx, strict=False)
    cg = man_congruence_check(ctx, strict=False)
    ok = bool(pb["ok"] and cg["ok"])
    keep = lambda d: {k: v for k, v in d.items() if isinstance(v, (bool, int, str, float))}
    return CheckResult(8, "pullback", _name(inst), ok, {"pullback": keep(pb), "congruence": keep(cg)})


def check_classify_fixed() -> CheckResult:
    F2, F4 = _field(2), _field(4)
    rows, ok = [], True
    a, b = context_from_rank(F2, 2, 2, 0), context_from_rank(F4, 2, 1, 0)
    res = classify_iso(a, b)
    wit = verify_witness(a, b, res.mapping)[0]
    rows.append({"pair": "q=2 2x2 r=0 / q=4 2x1 r=0", "isomorphic": res.isomorphic, "witness": wit})
    ok &= res.isomorphic and wit
    # distinct moduli for GF(8)
    from .field import make_field
    G1, G2 = make_field(2, 3, (1, 1, 0, 1)), make_field(2, 3, (1, 0, 1, 1))
    a, b = context_from_rank(G1, 1, 2, 1), scrambled_context_over(G2, 1, 2, 1)
    res = classify_iso(a, b)
    wit = verify_witness(a, b, res.mapping)[0]
    rows.append({"pair": "GF(8) two moduli 1x2 r=1", "isomorphic": res.isomorphic, "witness": wit})
    ok &= res.isomorphic and wit
    negatives = [
        (context_from_rank(F2, 2, 2, 1), context_from_rank(F2, 2, 2, 2)),
        (context_from_rank(F2, 2, 3, 1), context_from_rank(F2, 3, 2, 1)),
        (context_from_rank(F2, 1, 2, 1), context_from_rank(F4, 1, 2, 1)),
        (context_from_rank(F2, 2, 2, 0), context_from_rank(F2, 2, 1, 0)),
    ]
    for a, b in negatives:
        res = classify_iso(a, b)
        rows.append({"pair": f"{a.params()} / {b.params()}", "isomorphic": res.isomorphic})
        ok &= not res.isomorphic
    return CheckResult(9, "classify", "fixed pairs", bool(ok), {"pairs": rows})


def scrambled_context_over(F, m: int, n: int, r: int) -> SandwichContext:
    rng = np.random.default_rng(11)
    while True:
        A = rng.integers(0, F.q, size=(n, m))
        if batch_rank(F, A[None])[0] == r:
            return make_context(F, m, n, Matrix(F, A, shape=(n, m)))


def check_classify(inst: Instance) -> CheckResult:
    q, m, n, r = inst
    a, b = _jctx(inst), scrambled_context(*inst)
    if r == 0:
        b = context_from_rank(_field(q), n, m, 0)
    res = classify_iso(a, b)
    wit, why = verify_witness(a, b, res.mapping)
    ok = res.isomorphic and wit
    detail = {"isomorphic": res.isomorphic, "witness": why}
    if r >= 1:
        other = classify_iso(a, context_from_rank(_field(q), m, n, r - 1), build_witness=False)
        detail["lower_rank_isomorphic"] = other.isomorphic
        ok &= not other.isomorphic
    return CheckResult(9, "classify", _name(inst), bool(ok), detail)


def check_mididentity(inst: Instance, rp_limit: int = 200) -> CheckResult:
    ctx = _jctx(inst)
    F = ctx.field
    E = regular_elements(ctx, ctx.r, idempotent_only=True)
    X = ctx.all_elements()
    failures = sum(not mididentity_check(ctx, e, X) for e in E)
    detail = {"mididentities": len(E), "failures": int(failures)}
    ok = failures == 0
    P = regular_elements(ctx)
    if len(P) <= rp_limit:
        rp = regularity_preserving(ctx, budget=rp_limit)
        D = np.sort(batch_encode(F, regular_elements(ctx, ctx.r)))
        detail["RP"] = len(rp)
        detail["D"] = len(D)
        ok &= bool(np.array_equal(np.sort(rp), D))
    else:
        detail["RP"] = "skipped, |P| above limit"
    return CheckResult(10, "mididentity", _name(inst), bool(ok), detail)


def check_imported(q: int, n: int) -> CheckResult:
    F = _field(q)
    prod = lambda X, Y: batch_matmul(F, X, Y)
    Ms = all_matrices(F, n, n)
    ranks = batch_rank(F, Ms)
    codes = batch_encode(F, Ms)
    idem = codes == batch_encode(F, prod(Ms, Ms))
    detail, ok = {}, True
    # idempotents of rank n-1 generate the singular part
    cl = closure_codes(F, Ms[idem & (ranks == n - 1)], prod)
    singular = np.sort(codes[ranks < n])
    detail["singular"] = bool(np.array_equal(cl, singular))
    ok &= detail["singular"]
    for s in range(n):
        cl = closure_codes(F, Ms[idem & (ranks == s)], prod)
        good = bool(np.array_equal(cl, np.sort(codes[ranks <= s])))
        gens = idempotent_ideal_generators(F, n, s)
        G = np.stack([g.array for g in gens])
        small = closure_codes(F, G, prod)
        good &= len(gens) == q_binomial(q, n, s) and bool(np.array_equal(small, np.sort(codes[ranks <= s])))
        good &= bool((batch_rank(F, G) == s).all() and np.array_equal(batch_encode(F, prod(G, G)), batch_encode(F, G)))
        detail[f"ideal_{s}"] = good
        ok &= good
    gl = gl_genset(F, n)
    G = np.stack([g.array for g in gl.matrices])
    size = len(closure_codes(F, G, prod))
    detail["gl"] = {"size": size, "order": gl_order(q, n), "generators": len(G), "path": gl.path}
    ok &= size == gl_order(q, n) and len(G) <= 2
    return CheckResult(11, "imported", f"q={q} n={n}", bool(ok), detail)


# ---------------------------------------------------------------- runner

GROUPS = {
    "green": 1,
    "eggbox": 2,
    "counts": 3,
    "idempotents": 4,
    "closure": 5,
    "gensets": 6,
    "inflation": 7,
    "pullback": 8,
    "classify": 9,
    "mididentity": 10,
    "imported": 11,
}

_PER_INSTANCE = {
    "green": check_green,
    "eggbox": check_eggbox,
    "counts": check_counts,
    "idempotents": check_idempotents,
    "closure": check_idempotent_closure,
    "gensets": check_gensets,
    "inflation": check_inflation,
    "pullback": check_pullback,
    "classify": check_classify,
    "mididentity": check_mididentity,
}

_MUTABLE = {"green", "counts", "gensets"}


def _tasks(groups, grid, mutate):
    tasks = []
    for group in groups:
        if group == "eggbox":
            tasks.append(check_eggbox_fixed)
        if group == "classify":
            tasks.append(check_classify_fixed)
        if group == "imported":
            qs = sorted({inst[0] for inst in grid})
            for q in qs:
                for n in (1, 2, 3):
                    tasks.append(lambda q=q, n=n: check_imported(q, n))
            continue
        fn = _PER_INSTANCE[group]
        for inst in grid:
            if mutate and group in _MUTABLE:
                tasks.append(lambda fn=fn, inst=inst: fn(inst, mutate=True))
            else:
                tasks.append(lambda fn=fn, inst=inst: fn(inst))
    return tasks


def _safe(task) -> CheckResult:
    try:
        return task()
    except SandwichError as exc:  # report rather than abort the sweep
        return CheckResult(0, "error", getattr(task, "__name__", "task"), False,
                           {"error": type(exc).__name__, "message": str(exc)})


def run_checks(groups=None, grid=None, threads: int = 1, mutate: bool = False) -> list[CheckResult]:
    """Run the selected check groups; results come back in task order."""
    groups = list(GROUPS) if groups is None else list(groups)
    unknown = [g for g in groups if g not in GROUPS]
    if unknown:
        raise ValueError(f"unknown check groups: {', '.join(unknown)}")
    grid = default_grid() if grid is None else grid
    tasks = _tasks(groups, grid, mutate)
    if threads <= 1:
        return [_safe(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_safe, tasks))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def results_json(results: list[CheckResult]) -> str:
    body = {
        "ok": all(r.ok for r in results),
        "passed": sum(r.ok for r in results),
        "failed": sum(not r.ok for r in results),
        "results": [_jsonable(r.as_dict()) for r in results],
    }
    return json.dumps(body, indent=2, sort_keys=True) + "\n"
