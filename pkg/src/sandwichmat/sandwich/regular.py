"""The regular part of a sandwich semigroup, built from [M, A, N] parameters.

Regular elements (normalized coordinates) are exactly the block matrices
[A, AN; MA, MAN]; the element depends only on A, MA and AN. Enumerating one
M per value of MA and one N per value of AN therefore lists each regular
element once, without scanning all of M_mn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BudgetExceeded, NotRegular, VerificationFailure, enumeration_budget
from ..matrix import Matrix, all_matrices, batch_encode, batch_matmul, batch_rank, batch_row_key_codes, batch_col_key_codes
from ..psgp import canonical_labels, same_partition
from .context import SandwichContext, _corner_arrays, _decompose_normalized, _normalized_stack, structure

__all__ = [
    "regular_elements",
    "idempotents",
    "idempotent_mask",
    "classes_mod",
    "man_congruence_check",
    "pullback_check",
    "hhat_structure",
    "mididentity_check",
    "regularity_preserving",
]


def classes_mod(F, reps: np.ndarray, images: np.ndarray):
    """Least-code representative of each fibre of reps -> images.

    `reps` is a code-ordered stack, so the first occurrence of an image is the
    least representative. Returns (representatives, images) in that order.
    """
    codes = batch_encode(F, images)
    _, first = np.unique(codes, return_index=True)
    first = np.sort(first)
    return reps[first], images[first]


def _regular_for_A(ctx: SandwichContext, A: np.ndarray, Ms: np.ndarray, Ns: np.ndarray) -> np.ndarray:
    F, r, m, n = ctx.field, ctx.r, ctx.m, ctx.n
    Mrep, MA = classes_mod(F, Ms, batch_matmul(F, Ms, A))
    Nrep, AN = classes_mod(F, Ns, batch_matmul(F, A, Ns))
    kM, kN = len(Mrep), len(Nrep)
    out = np.zeros((kM, kN, m, n), dtype=np.int64)
    out[:, :, :r, :r] = A
    out[:, :, :r, r:] = AN[None]
    out[:, :, r:, :r] = MA[:, None]
    out[:, :, r:, r:] = batch_matmul(F, Mrep[:, None], AN[None])
    return out.reshape(kM * kN, m, n)


def _blocks(ctx: SandwichContext, budget: int | None):
    F, r, m, n = ctx.field, ctx.r, ctx.m, ctx.n
    Ms = all_matrices(F, m - r, r, budget)
    Ns = all_matrices(F, r, n - r, budget)
    As = all_matrices(F, r, r, budget)
    return Ms, As, Ns


def regular_elements(ctx: SandwichContext, s: int | None = None, *, normalized: bool = False,
                     budget: int | None = None, idempotent_only: bool = False) -> np.ndarray:
    """All regular elements (of rank s if given), sorted by code.

    Returned in the context's coordinates unless normalized=True.
    """
    F = ctx.field
    from ..combinatorics import idempotent_counts, sandwich_counts

    if idempotent_only:
        expected = idempotent_counts(ctx.q, ctx.m, ctx.n, ctx.r, s)
    elif s is None:
        expected = sandwich_counts(ctx.q, ctx.m, ctx.n, ctx.r, 0)["P_size"]
    else:
        expected = sandwich_counts(ctx.q, ctx.m, ctx.n, ctx.r, s)["D_size"]
    if expected > enumeration_budget(budget):
        raise BudgetExceeded(f"{expected} regular elements exceed the enumeration budget")
    Ms, As, Ns = _blocks(ctx, budget)
    if s is not None or idempotent_only:
        keep = np.ones(len(As), dtype=bool)
        if s is not None:
            keep &= batch_rank(F, As) == s
        if idempotent_only:
            keep &= (batch_encode(F, batch_matmul(F, As, As)) == batch_encode(F, As))
        As = As[keep]
    parts = [_regular_for_A(ctx, A, Ms, Ns) for A in As]
    if parts:
        X = np.concatenate(parts)
    else:
        X = np.zeros((0, ctx.m, ctx.n), dtype=np.int64)
    if not normalized:
        X = ctx.from_normalized_array(X)
    codes = batch_encode(F, X)
    order = np.argsort(codes)
    if len(np.unique(codes)) != len(codes):  # pragma: no cover - would contradict the fibre argument
        raise VerificationFailure("parametric enumeration produced duplicates")
    return X[order]


def idempotents(ctx: SandwichContext, s: int | None = None, budget: int | None = None) -> list[Matrix]:
    """All X with X*X = X, generated from idempotent A in M_r."""
    X = regular_elements(ctx, s, budget=budget, idempotent_only=True)
    return [Matrix._wrap(ctx.field, x) for x in X]


def idempotent_mask(ctx: SandwichContext, X: np.ndarray) -> np.ndarray:
    F = ctx.field
    return batch_encode(F, ctx.star_array(X, X)) == batch_encode(F, X)


# ---------------------------------------------------------------- congruence on triples


def man_congruence_check(ctx: SandwichContext, budget: int = 1 << 21, strict: bool = True) -> dict:
    """Exhaustive check that (M, A, N) -> [M, A, N] is an epimorphism from the
    triple semigroup onto P whose kernel is the relation (A, MA, AN) equal."""
    F, r, m, n = ctx.field, ctx.r, ctx.m, ctx.n
    Ms, As, Ns = _blocks(ctx, None)
    nM, nA, nN = len(Ms), len(As), len(Ns)
    total = nM * nA * nN
    if total * total > budget:
        raise BudgetExceeded(f"{total} triples are too many for an exhaustive check")
    iM, iA, iN = (g.reshape(-1) for g in np.meshgrid(np.arange(nM), np.arange(nA), np.arange(nN), indexing="ij"))
    MA = batch_matmul(F, Ms[:, None], As[None])  # (nM, nA, m-r, r)
    AN = batch_matmul(F, As[:, None], Ns[None])  # (nA, nN, r, n-r)
    MA_code = batch_encode(F, MA)
    AN_code = batch_encode(F, AN)
    A_code = batch_encode(F, As)

    def xi(iM, iA, iN):
        X = np.zeros((len(iM), m, n), dtype=np.int64)
        X[:, :r, :r] = As[iA]
        X[:, :r, r:] = AN[iA, iN]
        X[:, r:, :r] = MA[iM, iA]
        X[:, r:, r:] = batch_matmul(F, Ms[iM], AN[iA, iN])
        return X

    def sim_key(iM, iA, iN):
        return np.stack([A_code[iA], MA_code[iM, iA], AN_code[iA, iN]], axis=1)

    img = xi(iM, iA, iN)
    img_codes = batch_encode(F, img)
    report = {"U_size": total, "ok": True}
    # image is P
    P = regular_elements(ctx, normalized=True)
    report["P_size"] = len(P)
    surj = np.array_equal(np.unique(img_codes), np.sort(batch_encode(F, P)))
    # kernel is the relation
    kernel = same_partition(img_codes, canonical_labels(sim_key(iM, iA, iN)))
    # products of all pairs u, v: (M_u, A_u A_v, N_v)
    u, v = (g.reshape(-1) for g in np.meshgrid(np.arange(total), np.arange(total), indexing="ij"))
    AB = batch_matmul(F, As[iA[u]], As[iA[v]])
    AB_idx = np.searchsorted(A_code, batch_encode(F, AB))
    prod_img = xi(iM[u], AB_idx, iN[v])
    lhs = batch_encode(F, prod_img)
    rhs = batch_encode(F, ctx.star_array(img[u], img[v]))
    hom = bool(np.array_equal(lhs, rhs))
    # compatibility: the class of u*w depends only on the classes of u and w
    sim = canonical_labels(sim_key(iM, iA, iN))
    prod_sim = canonical_labels(sim_key(iM[u], AB_idx, iN[v]))
    pair = np.stack([sim[u], sim[v]], axis=1)
    combined = canonical_labels(np.stack([canonical_labels(pair), prod_sim], axis=1))
    congruence = len(np.unique(combined)) == len(np.unique(canonical_labels(pair)))
    report.update({"surjective": bool(surj), "kernel": bool(kernel), "homomorphism": hom, "congruence": bool(congruence),
                   "ratio": total / max(1, len(P))})
    report["ok"] = bool(surj and kernel and hom and congruence)
    if strict and not report["ok"]:
        raise VerificationFailure("triple congruence laws failed", report)
    return report


# ---------------------------------------------------------------- corners and pullback


def pullback_check(ctx: SandwichContext, strict: bool = True) -> dict:
    """psi = (XJ, JX) is injective on P with image {(Y, Z) in PJ x JP : JY = ZJ};
    the projections to M_r agree; psi and phi respect products."""
    F, r, m, n = ctx.field, ctx.r, ctx.m, ctx.n
    P = regular_elements(ctx, normalized=True)
    XJ, JX, _ = _corner_arrays(ctx, P)
    cXJ, cJX = batch_encode(F, XJ), batch_encode(F, JX)
    pairs = np.stack([cXJ, cJX], axis=1)
    injective = len(np.unique(pairs, axis=0)) == len(P)
    # all compatible pairs from the two corner images
    uXJ, iy = np.unique(cXJ, return_index=True)
    uJX, iz = np.unique(cJX, return_index=True)
    Y, Z = XJ[iy], JX[iz]
    JY = np.zeros((len(Y), n, m), dtype=np.int64)
    JY[:, :r, :] = Y[:, :r, :]
    ZJ = np.zeros((len(Z), n, m), dtype=np.int64)
    ZJ[:, :, :r] = Z[:, :, :r]
    cJY, cZJ = batch_encode(F, JY), batch_encode(F, ZJ)
    yy, zz = np.nonzero(cJY[:, None] == cZJ[None, :])
    compatible = np.stack([uXJ[yy], uJX[zz]], axis=1)
    image = np.unique(pairs, axis=0)
    image_ok = np.array_equal(np.unique(compatible, axis=0), image)
    # projections agree with phi
    A = P[:, :r, :r]
    phi1 = XJ[:, :r, :r]
    phi2 = JX[:, :r, :r]
    commutes = np.array_equal(phi1, A) and np.array_equal(phi2, A)
    # homomorphisms on all pairs (within budget)
    k = len(P)
    if k * k <= 1 << 20:
        u, v = (g.reshape(-1) for g in np.meshgrid(np.arange(k), np.arange(k), indexing="ij"))
    else:
        rng = np.random.default_rng(0)
        u, v = rng.integers(0, k, 1 << 18), rng.integers(0, k, 1 << 18)
    prod = ctx.star_array(P[u], P[v])
    phi_hom = np.array_equal(prod[:, :r, :r], batch_matmul(F, A[u], A[v]))
    pXJ, _, _ = _corner_arrays(ctx, prod)
    psi1_hom = np.array_equal(pXJ, batch_matmul(F, XJ[u], XJ[v]))
    # the corner image PJ is the set of regular elements of C_m(r)
    rank_Y = batch_rank(F, Y)
    corner_regular = bool((batch_rank(F, Y[:, :r, :]) == rank_Y).all())
    report = {
        "P_size": k,
        "injective": bool(injective),
        "image": bool(image_ok),
        "commutes": bool(commutes),
        "phi_hom": bool(phi_hom),
        "psi_hom": bool(psi1_hom),
        "corner_regular": corner_regular,
        "image_size": int(len(image)),
    }
    report["ok"] = all(v for key, v in report.items() if isinstance(v, bool))
    if strict and not report["ok"]:
        raise VerificationFailure("pullback laws failed", report)
    return report


# ---------------------------------------------------------------- inflation


@dataclass
class HhatReport:
    rank: int
    size: int
    n_hclasses: int
    hclass_sizes: list
    group_all: bool
    group_any: bool
    phi_group: bool
    phi_injective: bool
    rect_dims: tuple | None
    rect_ok: bool | None

    @property
    def verdict_ok(self) -> bool:
        """Inner H-classes are all groups or all non-groups, as phi's class is."""
        return self.group_all if self.phi_group else not self.group_any

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def hhat_structure(ctx: SandwichContext, X: Matrix) -> HhatReport:
    """The preimage under phi of the H-class of phi(X), inside the rank-s
    regular class, split into its H-classes."""
    F, r, m, n = ctx.field, ctx.r, ctx.m, ctx.n
    xn = _normalized_stack(ctx, X)
    if not structure(ctx, xn).in_P[0]:
        raise NotRegular("X must be regular")
    A0 = xn[0, :r, :r]
    s = int(batch_rank(F, A0[None])[0])
    As = all_matrices(F, r, r)
    # H-class of A0 in M_r: same row and column space
    same = (batch_row_key_codes(F, As) == batch_row_key_codes(F, A0[None])[0]) & (
        batch_col_key_codes(F, As) == batch_col_key_codes(F, A0[None])[0])
    HA = As[same]
    Ms, _, Ns = _blocks(ctx, None)
    elems = np.concatenate([_regular_for_A(ctx, B, Ms, Ns) for B in HA])
    st = structure(ctx, elems)
    hkey = canonical_labels(np.stack([st.col_key, st.row_key], axis=1))
    sizes = np.bincount(hkey)
    # group H-classes are those containing an idempotent
    idem = batch_encode(F, ctx.star_array(elems, elems)) == st.codes
    group_classes = np.zeros(len(sizes), dtype=bool)
    group_classes[hkey[idem]] = True
    phi_group = bool((batch_encode(F, batch_matmul(F, HA, HA)) == batch_encode(F, HA)).any())
    # phi restricted to each H-class is injective
    A_codes = batch_encode(F, elems[:, :r, :r])
    injective = len(np.unique(np.stack([hkey, A_codes], axis=1), axis=0)) == len(elems)
    rect_dims, rect_ok = None, None
    if phi_group:
        E = HA[(batch_encode(F, batch_matmul(F, HA, HA)) == batch_encode(F, HA))][0]
        Krep, _ = classes_mod(F, Ms, batch_matmul(F, Ms, E))
        Lrep, _ = classes_mod(F, Ns, batch_matmul(F, E, Ns))
        rect_dims = (len(Krep), len(HA), len(Lrep))
        # (K, B, L) -> [K, B, L] is a bijection onto the class and turns the
        # rectangular group product (K, B, L)(K', B', L') = (K, BB', L') into *
        iK, iB, iL = (g.reshape(-1) for g in np.meshgrid(np.arange(len(Krep)), np.arange(len(HA)), np.arange(len(Lrep)), indexing="ij"))

        def embed(iK, iB, iL):
            B = HA[iB]
            out = np.zeros((len(iK), m, n), dtype=np.int64)
            out[:, :r, :r] = B
            BL = batch_matmul(F, B, Lrep[iL])
            out[:, :r, r:] = BL
            out[:, r:, :r] = batch_matmul(F, Krep[iK], B)
            out[:, r:, r:] = batch_matmul(F, Krep[iK], BL)
            return out

        img = embed(iK, iB, iL)
        bij = np.array_equal(np.sort(batch_encode(F, img)), np.sort(st.codes))
        t = len(iK)
        u, v = (g.reshape(-1) for g in np.meshgrid(np.arange(t), np.arange(t), indexing="ij"))
        HA_codes = batch_encode(F, HA)
        order = np.argsort(HA_codes)
        HA_sorted = HA_codes[order]
        BB = order[np.searchsorted(HA_sorted, batch_encode(F, batch_matmul(F, HA[iB[u]], HA[iB[v]])))]
        hom = np.array_equal(batch_encode(F, embed(iK[u], BB, iL[v])), batch_encode(F, ctx.star_array(img[u], img[v])))
        rect_ok = bool(bij and hom)
    return HhatReport(
        rank=s,
        size=len(elems),
        n_hclasses=len(sizes),
        hclass_sizes=sorted(set(sizes.tolist())),
        group_all=bool(group_classes.all()),
        group_any=bool(group_classes.any()),
        phi_group=phi_group,
        phi_injective=bool(injective),
        rect_dims=rect_dims,
        rect_ok=rect_ok,
    )


# ---------------------------------------------------------------- mididentities


def mididentity_check(ctx: SandwichContext, E: np.ndarray, X: np.ndarray | None = None, chunk: int = 1 << 18) -> bool:
    """X * E * Z = X * Z for every X, Z (all of M_mn by default)."""
    F = ctx.field
    X = ctx.all_elements() if X is None else X
    N = len(X)
    XE = ctx.star_array(X, E[None])
    step = max(1, chunk // max(N, 1))
    for start in range(0, N, step):
        sl = slice(start, start + step)
        lhs = ctx.star_array(XE[sl, None], X[None])
        rhs = ctx.star_array(X[sl, None], X[None])
        if not np.array_equal(lhs, rhs):
            return False
    return True


def regularity_preserving(ctx: SandwichContext, budget: int = 400) -> np.ndarray:
    """Codes of X in P for which the variant (P, Y.Z = Y*X*Z) is regular."""
    F = ctx.field
    P = regular_elements(ctx)
    k = len(P)
    if k > budget:
        raise BudgetExceeded(f"|P| = {k} exceeds the regularity-preserving budget {budget}")
    codes = batch_encode(F, P)
    u, v = (g.reshape(-1) for g in np.meshgrid(np.arange(k), np.arange(k), indexing="ij"))
    table = np.searchsorted(codes, batch_encode(F, ctx.star_array(P[u], P[v]))).reshape(k, k)
    keep = []
    idx = np.arange(k)
    for x in range(k):
        # variant product y.z = table[table[y, x], z]
        yx = table[:, x]
        yxz = table[yx]  # (y, z) -> y*x*z
        # y.z.y = (y x z) x y
        yzy = table[table[yxz, x], idx[:, None]]
        if (yzy == idx[:, None]).any(axis=1).all():
            keep.append(int(codes[x]))
    return np.array(keep, dtype=np.int64)
