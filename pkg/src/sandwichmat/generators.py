"""Generating sets and the closure engine that certifies them."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .combinatorics import gl_order, mmn_dclass_counts, q_binomial, rank_formulas, parse_target
from .errors import (
    BudgetExceeded,
    DegenerateCase,
    DomainError,
    GreedySearchFailed,
    SearchExhausted,
    UnsupportedParameters,
    enumeration_budget,
)
from .field import Field
from .matrix import (
    Matrix,
    all_matrices,
    batch_decode,
    batch_encode,
    batch_matmul,
    batch_rank,
    batch_row_key_codes,
    batch_rref,
    inverse,
    stack,
    unstack,
)
from .sandwich.context import SandwichContext, context_from_rank
from .sandwich.regular import classes_mod, regular_elements

__all__ = [
    "Closure",
    "GenSetReport",
    "closure",
    "closure_codes",
    "gl_genset",
    "ind_step_factor",
    "idempotent_ideal_generators",
    "genset_full",
    "genset_reg",
    "genset_idem",
    "genset_ideal",
    "genset",
    "necessity_check",
]


# ---------------------------------------------------------------- closure


def closure_codes(F: Field, gens: np.ndarray, product, budget: int | None = None, chunk: int = 1 << 18) -> np.ndarray:
    """Sorted codes of the semigroup generated by a stack of matrices.

    Breadth-first: each round multiplies the newly found elements on the
    right by every generator.
    """
    budget = enumeration_budget(budget)
    if len(gens) == 0:
        return np.zeros(0, dtype=np.int64)
    m, n = gens.shape[1:]
    gcodes = np.unique(batch_encode(F, gens))
    gens = batch_decode(F, gcodes, m, n)
    seen = gcodes
    frontier = gens
    while len(frontier):
        step = max(1, chunk // len(gens))
        found = []
        for start in range(0, len(frontier), step):
            prod = product(frontier[start : start + step, None], gens[None])
            found.append(np.unique(batch_encode(F, prod)))
        new = np.setdiff1d(np.unique(np.concatenate(found)), seen, assume_unique=True)
        if len(seen) + len(new) > budget:
            raise BudgetExceeded(f"closure exceeds {budget} elements")
        seen = np.union1d(seen, new)
        frontier = batch_decode(F, new, m, n)
    return seen


@dataclass
class Closure:
    codes: np.ndarray
    target_size: int | None = None
    matches: bool | None = None

    @property
    def size(self) -> int:
        return len(self.codes)

    def certificate(self) -> dict:
        return {"closure_size": self.size, "target_size": self.target_size, "matches": self.matches}


def _as_stack(ctx_or_shape, seed) -> np.ndarray:
    m, n = ctx_or_shape
    if isinstance(seed, np.ndarray):
        return seed.reshape(-1, m, n)
    return stack(list(seed), m, n)


def closure(ctx: SandwichContext, seed, target=None, budget: int | None = None) -> Closure:
    """Subsemigroup of the sandwich semigroup generated by `seed`.

    `target` may be a size or an array of codes; the certificate records
    whether the closure matches it.
    """
    gens = _as_stack((ctx.m, ctx.n), seed)
    codes = closure_codes(ctx.field, gens, ctx.star_array, budget)
    out = Closure(codes)
    if target is not None:
        if isinstance(target, (int, np.integer)):
            out.target_size = int(target)
            out.matches = out.size == int(target)
        else:
            tcodes = np.unique(np.asarray(target, dtype=np.int64))
            out.target_size = len(tcodes)
            out.matches = bool(np.array_equal(codes, tcodes))
    return out


def _square_product(F: Field):
    return lambda X, Y: batch_matmul(F, X, Y)


# ---------------------------------------------------------------- general linear groups


@dataclass
class GLGenSet:
    matrices: list
    path: str
    group_size: int
    certified: bool


def _mat_pow(F: Field, X: np.ndarray, e: int) -> np.ndarray:
    out = np.eye(X.shape[0], dtype=np.int64)
    base = X
    while e:
        if e & 1:
            out = batch_matmul(F, out, base)
        base = batch_matmul(F, base, base)
        e >>= 1
    return out


def _prime_factors(N: int) -> list[int]:
    out, d = [], 2
    while d * d <= N:
        if N % d == 0:
            out.append(d)
            while N % d == 0:
                N //= d
        d += 1
    if N > 1:
        out.append(N)
    return out


def _has_order(F: Field, X: np.ndarray, order: int) -> bool:
    eye = np.eye(X.shape[0], dtype=np.int64)
    if not np.array_equal(_mat_pow(F, X, order), eye):
        return False
    return all(not np.array_equal(_mat_pow(F, X, order // p), eye) for p in _prime_factors(order))


def _companion(F: Field, low: list[int]) -> np.ndarray:
    """Companion matrix of x^s + low[s-1] x^{s-1} + ... + low[0]."""
    s = len(low)
    C = np.zeros((s, s), dtype=np.int64)
    C[1:, :-1] = np.eye(s - 1, dtype=np.int64)
    C[:, -1] = [F.neg(c) for c in low]
    return C


def _group_size(F: Field, gens: np.ndarray, limit: int) -> int:
    return len(closure_codes(F, gens, _square_product(F), budget=limit + len(gens)))


def _fallback_gl(F: Field, s: int) -> np.ndarray:
    mats = []
    for a in range(s):
        for b in range(s):
            if a != b:
                E = np.eye(s, dtype=np.int64)
                E[a, b] = 1
                mats.append(E)
    D = np.eye(s, dtype=np.int64)
    prim = next(a for a in range(1, F.q) if F.mult_order(a) == F.q - 1)
    D[0, 0] = prim
    mats.append(D)
    P = np.roll(np.eye(s, dtype=np.int64), 1, axis=0)
    mats.append(P)
    return np.stack(mats)


def gl_genset(field: Field, s: int, seed: int = 0, random_tries: int = 64, budget: int | None = None) -> GLGenSet:
    """At most two matrices generating GL_s(q), certified by group closure."""
    if s < 1:
        raise DomainError("s must be at least 1")
    F, q = field, field.q
    order = gl_order(q, s)
    if q ** (s * s) > enumeration_budget(budget):
        raise BudgetExceeded(f"GL_{s}({q}) is too large to certify")
    if s == 1:
        prim = next(a for a in range(1, q) if F.mult_order(a) == q - 1)
        return GLGenSet([Matrix(F, [[prim]])], "primitive", order, True)
    # a Singer cycle from a primitive polynomial
    singer = None
    for code in range(q**s):
        low = [(code // q**i) % q for i in range(s)]
        if low[0] == 0:
            continue
        C = _companion(F, low)
        if _has_order(F, C, q**s - 1):
            singer = C
            break
    rng = np.random.default_rng(seed)
    if singer is not None:
        def ok(B):
            return batch_rank(F, B[None])[0] == s and _group_size(F, np.stack([singer, B]), order) == order

        for _ in range(random_tries):
            B = rng.integers(0, q, size=(s, s))
            if ok(B):
                return GLGenSet([Matrix(F, singer), Matrix(F, B)], "search", order, True)
        for code in range(q ** (s * s)):
            B = batch_decode(F, np.array([code]), s, s)[0]
            if ok(B):
                return GLGenSet([Matrix(F, singer), Matrix(F, B)], "search", order, True)
    gens = _fallback_gl(F, s)
    if _group_size(F, gens, order) != order:  # pragma: no cover - elementary matrices generate GL
        raise SearchExhausted(f"no generating set found for GL_{s}({q})")
    return GLGenSet(unstack(F, gens), "fallback", order, True)


# ---------------------------------------------------------------- factorisation step


def _nullspace(F: Field, X: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Basis of {v : Xv = 0} as columns, plus the pivot columns of rref(X)."""
    m, n = X.shape
    R, rk, piv = batch_rref(F, X[None])
    R, rk = R[0], int(rk[0])
    piv = [int(c) for c in piv[0, :rk]]
    free = [c for c in range(n) if c not in piv]
    K = np.zeros((n, len(free)), dtype=np.int64)
    for t, f in enumerate(free):
        K[f, t] = 1
        for i, p in enumerate(piv):
            K[p, t] = F.neg(int(R[i, f]))
    return K, piv


def _extend_columns(F: Field, cols: np.ndarray, target: int) -> list[np.ndarray]:
    """Standard basis vectors extending independent columns to `target` many."""
    d = cols.shape[0]
    current = cols
    extra = []
    for i in range(d):
        if current.shape[1] + 0 >= target:
            break
        e = np.zeros((d, 1), dtype=np.int64)
        e[i, 0] = 1
        trial = np.concatenate([current, e], axis=1)
        if batch_rank(F, trial[None])[0] == trial.shape[1]:
            current = trial
            extra.append(e[:, 0])
    return extra


def ind_step_factor(ctx: SandwichContext, X: Matrix) -> tuple[Matrix, Matrix]:
    """Write X = Y * Z with rank Y = min(m, n) and rank Z = rank X + 1.

    Needs rank X < min(m, n) and rank X <= r (no product has rank above r).
    Both factors are checked before they are returned.
    """
    F, m, n, r = ctx.field, ctx.m, ctx.n, ctx.r
    ell = min(m, n)
    if r == m == n:
        raise DegenerateCase("no rank-raising factorisation when r = m = n")
    Xn = ctx.to_normalized(X).array
    s = int(batch_rank(F, Xn[None])[0])
    if s >= ell:
        raise DomainError(f"rank {s} is not below min(m, n) = {ell}")
    if s > r:
        raise DomainError(f"rank {s} exceeds r = {r}, so X is not a product")
    K, piv = _nullspace(F, Xn)
    basis = np.zeros((n, n), dtype=np.int64)
    for i, p in enumerate(piv):
        basis[p, i] = 1
    basis[:, s:] = K
    # Z sends v_i to e_i (i < s), the last basis vector to e_m, the rest to 0
    T = np.zeros((m, n), dtype=np.int64)
    for i in range(s):
        T[i, i] = 1
    T[m - 1, n - 1] = 1
    Zn = batch_matmul(F, T, inverse(Matrix(F, basis)).array)
    # Y sends e_i to X v_i (i < s) and fills up to full rank
    images = batch_matmul(F, Xn, basis[:, :s])
    Yn = np.zeros((m, n), dtype=np.int64)
    Yn[:, :s] = images
    extra = _extend_columns(F, images, ell)
    slots = [c for c in range(s, n) if not (r == m and c == m - 1)]
    for c, v in zip(slots, extra):
        Yn[:, c] = v
    Y = ctx.from_normalized(Matrix(F, Yn))
    Z = ctx.from_normalized(Matrix(F, Zn))
    from .sandwich.context import star

    from .matrix import rank

    if star(ctx, Y, Z) != X or rank(Y) != ell or rank(Z) != s + 1:  # pragma: no cover - self-check
        raise DegenerateCase("factorisation failed its postconditions")
    return Y, Z


# ---------------------------------------------------------------- idempotent generators of ideals of M_r


def _subspace_bases(F: Field, r: int, s: int) -> np.ndarray:
    """RREF bases (s x r) of the s-dimensional subspaces of F^r, by key order."""
    mats = all_matrices(F, s, r)
    mats = mats[batch_rank(F, mats) == s]
    R = batch_rref(F, mats)[0]
    codes = batch_encode(F, R)
    _, first = np.unique(codes, return_index=True)
    return R[first]


def idempotent_ideal_generators(field: Field, r: int, s: int, seed: int = 0, attempts: int = 400) -> list[Matrix]:
    """[r s]_q idempotents of rank s generating every r x r matrix of rank <= s.

    One idempotent per column space, matched to row spaces so that the
    idempotents are chained through group H-classes; candidates are certified
    by closure.
    """
    F, q = field, field.q
    if not 0 <= s < r:
        raise DomainError(f"need 0 <= s < r, got s={s}, r={r}")
    if s == 0:
        return [Matrix(F, np.zeros((r, r), dtype=np.int64), shape=(r, r))]
    W = _subspace_bases(F, r, s)  # row spaces
    C = np.swapaxes(W, 1, 2)  # column spaces
    k = len(W)
    WC = batch_matmul(F, W[None, :, :, :], C[:, None, :, :])  # [i, j] = W_j C_i
    group = batch_rank(F, WC) == s  # group[i, j]: column space i with row space j
    target = sum(mmn_dclass_counts(q, r, r, t)["size"] for t in range(s + 1))
    rng = np.random.default_rng(seed)
    best = 0
    for _ in range(attempts):
        match = _random_matching(group, rng)
        if match is None:
            continue
        # chain condition: idempotent digraph strongly connected
        adj = group[:, match].T  # adj[i, j]: W_{match[i]} with C_j is a group pair
        if not _strongly_connected(adj):
            continue
        E = []
        for i in range(k):
            j = match[i]
            inv = inverse(Matrix(F, WC[i, j])).array
            E.append(batch_matmul(F, batch_matmul(F, C[i], inv), W[j]))
        E = np.stack(E)
        size = len(closure_codes(F, E, _square_product(F), budget=target + 1))
        best = max(best, size)
        if size == target:
            return unstack(F, E)
    raise GreedySearchFailed(f"no idempotent generating set found; best closure size {best} of {target}")


def _random_matching(adj: np.ndarray, rng) -> list[int] | None:
    k = adj.shape[0]
    match_r = [-1] * k  # right vertex -> left vertex
    order = rng.permutation(k)

    def try_assign(i, seen):
        for j in rng.permutation(k):
            if adj[i, j] and not seen[j]:
                seen[j] = True
                if match_r[j] < 0 or try_assign(match_r[j], seen):
                    match_r[j] = i
                    return True
        return False

    for i in order:
        if not try_assign(int(i), [False] * k):
            return None
    match = [0] * k
    for j, i in enumerate(match_r):
        match[i] = j
    return match


def _strongly_connected(adj: np.ndarray) -> bool:
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    n_comp, _ = connected_components(csr_matrix(adj.astype(np.int8)), directed=True, connection="strong")
    return n_comp == 1


# ---------------------------------------------------------------- generating sets


@dataclass
class GenSetReport:
    target: str
    params: dict
    generators: list
    formula_size: int
    closure_size: int
    target_size: int
    certified: bool
    minimality: str
    gl_path: str | None = None
    notes: list = dc_field(default_factory=list)

    @property
    def claimed_size(self) -> int:
        return len(self.generators)

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "params": self.params,
            "claimed_size": self.claimed_size,
            "formula_size": self.formula_size,
            "closure_size": self.closure_size,
            "target_size": self.target_size,
            "certified": self.certified,
            "minimality": self.minimality,
            "gl_path": self.gl_path,
            "generators": [X.tolist() for X in self.generators],
        }


def _man_array(ctx: SandwichContext, M: np.ndarray, A: np.ndarray, N: np.ndarray) -> np.ndarray:
    F, r, m, n = ctx.field, ctx.r, ctx.m, ctx.n
    X = np.zeros((m, n), dtype=np.int64)
    AN = batch_matmul(F, A, N)
    MA = batch_matmul(F, M, A)
    X[:r, :r] = A
    X[:r, r:] = AN
    X[r:, :r] = MA
    X[r:, r:] = batch_matmul(F, MA, N)
    return X


def _finish(ctx, target, gens_n: np.ndarray, target_codes: np.ndarray, minimality: str, gl_path=None, budget=None):
    """Map normalized generators back, close them up and compare with the target."""
    gens = ctx.from_normalized_array(gens_n) if len(gens_n) else gens_n
    cl = closure(ctx, gens, target_codes, budget)
    q, m, n, r = ctx.q, ctx.m, ctx.n, ctx.r
    return GenSetReport(
        target=target,
        params=ctx.params(),
        generators=unstack(ctx.field, gens),
        formula_size=rank_formulas(q, m, n, r, target),
        closure_size=cl.size,
        target_size=int(cl.target_size),
        certified=bool(cl.matches) and len(gens) == rank_formulas(q, m, n, r, target),
        minimality=minimality,
        gl_path=gl_path,
    )


def _full_top_normalized(ctx: SandwichContext) -> tuple[np.ndarray, str]:
    """Generators for r = m < n, in normalized coordinates."""
    F, m, n = ctx.field, ctx.m, ctx.n
    gl = gl_genset(F, m)
    G = stack(gl.matrices)
    Ns = all_matrices(F, m, n - m)
    omega1 = np.zeros((len(Ns), m, n), dtype=np.int64)
    for t, N in enumerate(Ns):
        A = G[t % len(G)]
        omega1[t, :, :m] = A
        omega1[t, :, m:] = batch_matmul(F, A, N)
    # one representative per L-class of the non-regular top-rank matrices
    allX = all_matrices(F, m, n)
    top = allX[(batch_rank(F, allX) == m) & (batch_rank(F, allX[:, :, :m]) < m)]
    keys = batch_row_key_codes(F, top)
    _, first = np.unique(keys, return_index=True)
    omega2 = top[np.sort(first)]
    return np.concatenate([omega1, omega2]), gl.path


def genset_full(ctx: SandwichContext, budget: int | None = None) -> GenSetReport:
    F, m, n, r = ctx.field, ctx.m, ctx.n, ctx.r
    ell = min(m, n)
    if r == m == n:
        raise UnsupportedParameters("r = m = n is the matrix monoid itself")
    allX = ctx.all_elements(budget)
    target = batch_encode(F, allX)
    if r < ell:
        gens = allX[batch_rank(F, allX) > r]
        gens_n = ctx.to_normalized_array(gens)
        return _finish(ctx, "full", gens_n, target, "every element of rank above r is indecomposable", budget=budget)
    if m < n:
        gens_n, path = _full_top_normalized(ctx)
    else:
        dual = context_from_rank(F, n, m, r)
        gens_t, path = _full_top_normalized(dual)
        gens_n = np.swapaxes(gens_t, 1, 2)
    return _finish(ctx, "full", gens_n, target, "one generator per one-sided class of the top rank", path, budget)


def genset_reg(ctx: SandwichContext, budget: int | None = None) -> GenSetReport:
    F, m, n, r = ctx.field, ctx.m, ctx.n, ctx.r
    if r == 0 or r == m == n:
        raise UnsupportedParameters("needs 1 <= r and not r = m = n")
    Ms = all_matrices(F, m - r, r)
    Ns = all_matrices(F, r, n - r)
    gl = gl_genset(F, r)
    G = stack(gl.matrices)
    K = max(len(Ms), len(Ns))
    gens = [_man_array(ctx, Ms[t % len(Ms)], G[t % len(G)], Ns[t % len(Ns)]) for t in range(K)]
    lower = np.eye(r, dtype=np.int64)
    lower[r - 1, r - 1] = 0
    gens.append(_man_array(ctx, np.zeros((m - r, r), np.int64), lower, np.zeros((r, n - r), np.int64)))
    target = batch_encode(F, regular_elements(ctx))
    return _finish(ctx, "reg", np.stack(gens), target, "rank of the top rectangular group plus one", gl.path, budget)


def _idempotent_target(ctx: SandwichContext) -> np.ndarray:
    F, r = ctx.field, ctx.r
    lower = np.concatenate([regular_elements(ctx, s) for s in range(r)]) if r else np.zeros((0, ctx.m, ctx.n), np.int64)
    top = regular_elements(ctx, r, idempotent_only=True)
    return batch_encode(F, np.concatenate([lower, top]))


def genset_idem(ctx: SandwichContext, budget: int | None = None) -> GenSetReport:
    F, m, n, r = ctx.field, ctx.m, ctx.n, ctx.r
    if r == 0 or r == m == n:
        raise UnsupportedParameters("needs 1 <= r and not r = m = n")
    Ms = all_matrices(F, m - r, r)
    Ns = all_matrices(F, r, n - r)
    K = max(len(Ms), len(Ns))
    eye = np.eye(r, dtype=np.int64)
    gens = [_man_array(ctx, Ms[t % len(Ms)], eye, Ns[t % len(Ns)]) for t in range(K)]
    zM, zN = np.zeros((m - r, r), np.int64), np.zeros((r, n - r), np.int64)
    for A in idempotent_ideal_generators(F, r, r - 1):
        gens.append(_man_array(ctx, zM, A.array, zN))
    return _finish(ctx, "idem", np.stack(gens), _idempotent_target(ctx),
                   "rectangular band of the top class plus idempotent generators of M_r minus G_r", budget=budget)


def genset_ideal(ctx: SandwichContext, s: int, budget: int | None = None) -> GenSetReport:
    F, m, n, r = ctx.field, ctx.m, ctx.n, ctx.r
    if r == 0 or r == m == n:
        raise UnsupportedParameters("needs 1 <= r and not r = m = n")
    if s == r:
        rep = genset_reg(ctx, budget)
        rep.target = f"ideal:{s}"
        return rep
    if not 0 <= s < r:
        raise UnsupportedParameters(f"need 0 <= s <= r, got {s}")
    Ms = all_matrices(F, m - r, r)
    Ns = all_matrices(F, r, n - r)
    gens = []
    for A in idempotent_ideal_generators(F, r, s):
        a = A.array
        Krep, _ = classes_mod(F, Ms, batch_matmul(F, Ms, a))
        Lrep, _ = classes_mod(F, Ns, batch_matmul(F, a, Ns))
        Q = max(len(Krep), len(Lrep))
        gens += [_man_array(ctx, Krep[t % len(Krep)], a, Lrep[t % len(Lrep)]) for t in range(Q)]
    target = batch_encode(F, np.concatenate([regular_elements(ctx, t) for t in range(s + 1)]))
    return _finish(ctx, f"ideal:{s}", np.stack(gens), target, "idempotents indexed by classes of the rank-s layer",
                   budget=budget)


def genset(ctx: SandwichContext, target: str, budget: int | None = None) -> GenSetReport:
    kind, s = parse_target(target)
    if kind == "full":
        return genset_full(ctx, budget)
    if kind == "reg":
        return genset_reg(ctx, budget)
    if kind == "idem":
        return genset_idem(ctx, budget)
    return genset_ideal(ctx, s, budget)


# ---------------------------------------------------------------- necessity


def necessity_check(ctx: SandwichContext, target: str, report: GenSetReport | None = None, budget: int | None = None) -> dict:
    """Evidence that the constructed generators cannot be thinned out."""
    F, m, n, r = ctx.field, ctx.m, ctx.n, ctx.r
    kind, s = parse_target(target)
    ell = min(m, n)
    out = {"target": target, "ok": True, "runs": 0}
    if kind == "full" and r < ell:
        allX = ctx.all_elements(budget)
        low = allX[batch_rank(F, allX) <= r]
        cl = closure(ctx, low, budget=budget)
        out["closure_of_low_ranks"] = cl.size
        out["whole"] = len(allX)
        out["ok"] = cl.size < len(allX) and bool(np.isin(cl.codes, batch_encode(F, low)).all())
        out["runs"] = 1
        return out
    report = report if report is not None else genset(ctx, target, budget)
    gens = stack(report.generators, m, n)
    tcodes = None
    if kind == "full":
        # each generator is alone in its one-sided class of the top rank
        gens_n = ctx.to_normalized_array(gens)
        side = np.swapaxes(gens_n, 1, 2) if m > n else gens_n
        keys = batch_row_key_codes(F, side)
        for t in range(len(gens)):
            rest = np.delete(gens, t, axis=0)
            cl = closure(ctx, rest, budget=budget)
            cn = ctx.to_normalized_array(ctx.decode(cl.codes))
            cside = np.swapaxes(cn, 1, 2) if m > n else cn
            reached = (batch_rank(F, cn) == ell) & (batch_row_key_codes(F, cside) == keys[t])
            out["runs"] += 1
            if reached.any():
                out["ok"] = False
                out["witness"] = report.generators[t].tolist()
                break
        return out
    for t in range(len(gens)):
        rest = np.delete(gens, t, axis=0)
        cl = closure(ctx, rest, budget=budget)
        out["runs"] += 1
        if cl.size >= report.target_size:
            out["ok"] = False
            out["witness"] = report.generators[t].tolist()
            break
    return out
