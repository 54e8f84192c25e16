"""Sandwich semigroups of m x n matrices with product X * Y = X A Y.

Every context carries invertible U, V with A = U J V, where J is the n x m
matrix with I_r in its top-left corner. The map X -> V X U is an isomorphism
onto the sandwich semigroup with sandwich matrix J, and all structural
questions are answered there.

Public functions take and return matrices in the context's own coordinates.
Block data (the [M, A, N] parameters, the corner products XJ, JX, JXJ and the
projection to r x r matrices) refer to the normalized image V X U. For a
context built from a rank, the two coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import DimensionMismatch, DomainError, NotInImage, NotRegular, VerificationFailure, enumeration_budget
from ..field import Field
from ..matrix import (
    Matrix,
    all_matrices,
    batch_col_key_codes,
    batch_decode,
    batch_encode,
    batch_matmul,
    batch_rank,
    batch_row_key_codes,
    batch_rref,
    identity,
    inverse,
    jmatrix,
    mat_mul,
    rank,
    rank_normal_form,
)

__all__ = [
    "SandwichContext",
    "RegFlags",
    "RegTriple",
    "GreenKey",
    "CornerImages",
    "make_context",
    "context_from_rank",
    "star",
    "reg_membership",
    "green_key",
    "green_labels",
    "structure",
    "dclass_leq",
    "dclass_leq_matrix",
    "maximal_dclasses",
    "man_decompose",
    "phi_project",
    "corner_images",
    "psi_embed",
    "psi_reconstruct",
]


@dataclass(frozen=True)
class SandwichContext:
    field: Field
    m: int
    n: int
    A: Matrix
    r: int
    U: Matrix
    V: Matrix
    normalized: bool
    U_inv: Matrix = dc_field(init=False, repr=False, compare=False)
    V_inv: Matrix = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "U_inv", inverse(self.U))
        object.__setattr__(self, "V_inv", inverse(self.V))

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def size(self) -> int:
        return self.field.q ** (self.m * self.n)

    @property
    def J(self) -> Matrix:
        return jmatrix(self.field, self.n, self.m, self.r)

    def params(self) -> dict:
        return {"q": self.q, "m": self.m, "n": self.n, "r": self.r}

    def to_normalized(self, X: Matrix) -> Matrix:
        return mat_mul(mat_mul(self.V, X), self.U)

    def from_normalized(self, X: Matrix) -> Matrix:
        return mat_mul(mat_mul(self.V_inv, X), self.U_inv)

    def to_normalized_array(self, X: np.ndarray) -> np.ndarray:
        if self.normalized:
            return X
        F = self.field
        return batch_matmul(F, batch_matmul(F, self.V.array, X), self.U.array)

    def from_normalized_array(self, X: np.ndarray) -> np.ndarray:
        if self.normalized:
            return X
        F = self.field
        return batch_matmul(F, batch_matmul(F, self.V_inv.array, X), self.U_inv.array)

    def star_array(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """X A Y for broadcastable stacks in the context's coordinates."""
        F = self.field
        if self.normalized:
            r = self.r
            return batch_matmul(F, X[..., :, :r], Y[..., :r, :])
        return batch_matmul(F, batch_matmul(F, X, self.A.array), Y)

    def encode(self, X: np.ndarray) -> np.ndarray:
        return batch_encode(self.field, X)

    def decode(self, codes) -> np.ndarray:
        return batch_decode(self.field, codes, self.m, self.n)

    def all_elements(self, budget: int | None = None) -> np.ndarray:
        return all_matrices(self.field, self.m, self.n, budget)

    def matrix(self, a: np.ndarray) -> Matrix:
        return Matrix(self.field, a, shape=(self.m, self.n))


def make_context(field: Field, m: int, n: int, A: Matrix) -> SandwichContext:
    if A.shape != (n, m):
        raise DimensionMismatch(f"sandwich matrix must be {n}x{m}, got {A.m}x{A.n}")
    if A.field != field:
        raise DomainError("sandwich matrix is over a different field")
    r = rank(A)
    if A == jmatrix(field, n, m, r):
        return SandwichContext(field, m, n, A, r, identity(field, n), identity(field, m), True)
    U, V, r = rank_normal_form(A)
    return SandwichContext(field, m, n, A, r, U, V, False)


def context_from_rank(field: Field, m: int, n: int, r: int) -> SandwichContext:
    """The context with sandwich matrix J of rank r (no normalisation needed)."""
    if not 0 <= r <= min(m, n):
        raise DomainError(f"rank {r} impossible for {n}x{m} sandwich matrices")
    return SandwichContext(field, m, n, jmatrix(field, n, m, r), r, identity(field, n), identity(field, m), True)


def _check_shape(ctx: SandwichContext, X: Matrix) -> None:
    if X.shape != (ctx.m, ctx.n):
        raise DimensionMismatch(f"expected a {ctx.m}x{ctx.n} matrix, got {X.m}x{X.n}")


def star(ctx: SandwichContext, X: Matrix, Y: Matrix) -> Matrix:
    _check_shape(ctx, X)
    _check_shape(ctx, Y)
    return Matrix._wrap(ctx.field, ctx.star_array(X.array, Y.array))


# ---------------------------------------------------------------- structure


@dataclass(frozen=True)
class RegFlags:
    in_P1: bool
    in_P2: bool
    in_P: bool


@dataclass
class Structure:
    """Per-element structural data of a stack of normalized matrices."""

    codes: np.ndarray
    rank: np.ndarray
    rank_XJ: np.ndarray
    rank_JX: np.ndarray
    rank_JXJ: np.ndarray
    col_key: np.ndarray
    row_key: np.ndarray

    @property
    def in_P1(self):
        return self.rank_XJ == self.rank

    @property
    def in_P2(self):
        return self.rank_JX == self.rank

    @property
    def in_P(self):
        return self.in_P1 & self.in_P2


def structure(ctx: SandwichContext, Xn: np.ndarray) -> Structure:
    """Ranks and subspace keys for a stack of normalized matrices."""
    F, r = ctx.field, ctx.r
    st = Structure(
        codes=batch_encode(F, Xn),
        rank=batch_rank(F, Xn),
        rank_XJ=batch_rank(F, Xn[:, :, :r]),
        rank_JX=batch_rank(F, Xn[:, :r, :]),
        rank_JXJ=batch_rank(F, Xn[:, :r, :r]),
        col_key=batch_col_key_codes(F, Xn),
        row_key=batch_row_key_codes(F, Xn),
    )
    # two-sided rank survival is asserted to agree with P1 and P2 together
    P3 = st.rank_JXJ == st.rank
    if not np.array_equal(P3, st.in_P):
        bad = int(np.nonzero(P3 != st.in_P)[0][0])
        raise VerificationFailure("P3 differs from P1 & P2", int(st.codes[bad]))
    return st


def _normalized_stack(ctx: SandwichContext, X: Matrix) -> np.ndarray:
    _check_shape(ctx, X)
    return ctx.to_normalized_array(X.array[None])


def reg_membership(ctx: SandwichContext, X: Matrix) -> RegFlags:
    st = structure(ctx, _normalized_stack(ctx, X))
    return RegFlags(bool(st.in_P1[0]), bool(st.in_P2[0]), bool(st.in_P[0]))


@dataclass(frozen=True, order=True)
class GreenKey:
    """Identifier of a Green's class in the sandwich semigroup.

    `case` is one of "col" (column space; data = key code), "row" (row space),
    "pair" (both), "rank" (regular D-class; data = (rank,)) or "single"
    (a one-element class; data = code of the normalized element).
    """

    kind: str
    case: str
    data: tuple

    def __str__(self) -> str:
        return f"{self.case[0]}:" + ".".join(str(v) for v in self.data)


_CASES = ("single", "col", "row", "pair", "rank")


def _key_rows(st: Structure, kind: str) -> np.ndarray:
    """(N, 3) int array: case index and up to two data values."""
    N = len(st.codes)
    P1, P2, P = st.in_P1, st.in_P2, st.in_P
    single = np.stack([np.zeros(N, np.int64), st.codes, np.zeros(N, np.int64)], axis=1)
    col = np.stack([np.full(N, 1), st.col_key, np.zeros(N, np.int64)], axis=1)
    row = np.stack([np.full(N, 2), st.row_key, np.zeros(N, np.int64)], axis=1)
    pair = np.stack([np.full(N, 3), st.col_key, st.row_key], axis=1)
    rk = np.stack([np.full(N, 4), st.rank, np.zeros(N, np.int64)], axis=1)
    if kind == "R":
        return np.where(P1[:, None], col, single)
    if kind == "L":
        return np.where(P2[:, None], row, single)
    if kind == "H":
        return np.where(P[:, None], pair, single)
    if kind in ("D", "J"):
        out = np.where(P1[:, None], col, single)
        out = np.where((P2 & ~P1)[:, None], row, out)
        return np.where(P[:, None], rk, out)
    raise DomainError(f"unknown relation {kind!r}")


def green_key(ctx: SandwichContext, X: Matrix, kind: str) -> GreenKey:
    st = structure(ctx, _normalized_stack(ctx, X))
    case, d1, d2 = (int(v) for v in _key_rows(st, kind)[0])
    name = _CASES[case]
    data = (d1, d2) if name == "pair" else (d1,)
    return GreenKey(kind, name, data)


def green_labels(ctx: SandwichContext, kind: str, X: np.ndarray | None = None) -> np.ndarray:
    """Class labels (by first appearance) over a stack, default all of M_mn."""
    from ..psgp import canonical_labels

    X = ctx.all_elements() if X is None else X
    st = structure(ctx, ctx.to_normalized_array(X))
    return canonical_labels(_key_rows(st, kind))


def regular_mask(ctx: SandwichContext, X: np.ndarray) -> np.ndarray:
    return structure(ctx, ctx.to_normalized_array(X)).in_P


# ---------------------------------------------------------------- D-order


def _contains_rows(F: Field, big: np.ndarray, small: np.ndarray) -> np.ndarray:
    """Row space of `small` inside row space of `big`, stackwise."""
    both = np.concatenate([big, small], axis=-2)
    return batch_rank(F, both) == batch_rank(F, big)


def dclass_leq_matrix(ctx: SandwichContext, Xn: np.ndarray, Yn: np.ndarray) -> np.ndarray:
    """leq[i, j]: D-class of Xn[i] lies below that of Yn[j] (normalized stacks)."""
    F, r = ctx.field, ctx.r
    nx, ny = len(Xn), len(Yn)
    rank_X = batch_rank(F, Xn)
    rank_JYJ = batch_rank(F, Yn[:, :r, :r])
    out = rank_X[:, None] <= rank_JYJ[None, :]
    out |= batch_encode(F, Xn)[:, None] == batch_encode(F, Yn)[None, :]
    XX = np.broadcast_to(Xn[:, None], (nx, ny) + Xn.shape[1:])
    JY = np.broadcast_to(Yn[None, :, :r, :], (nx, ny, r, ctx.n))
    out |= _contains_rows(F, JY, XX)
    YJ = np.broadcast_to(np.swapaxes(Yn[None, :, :, :r], -1, -2), (nx, ny, r, ctx.m))
    out |= _contains_rows(F, YJ, np.swapaxes(XX, -1, -2))
    return out


def dclass_leq(ctx: SandwichContext, X: Matrix, Y: Matrix) -> bool:
    """X's D-class lies below Y's in the sandwich semigroup."""
    Xn, Yn = _normalized_stack(ctx, X), _normalized_stack(ctx, Y)
    sx = structure(ctx, Xn)
    sy = structure(ctx, Yn)
    # shortcuts when either side is regular
    if sx.in_P[0]:
        return bool(sx.rank[0] <= sy.rank_JXJ[0])
    if sy.in_P[0]:
        return bool(sx.rank[0] <= sy.rank[0])
    return bool(dclass_leq_matrix(ctx, Xn, Yn)[0, 0])


def maximal_dclasses(ctx: SandwichContext) -> dict:
    from ..combinatorics import mmn_dclass_counts

    m, n, r, q = ctx.m, ctx.n, ctx.r, ctx.q
    ell = min(m, n)
    if r == ell:
        out = {
            "kind": "top regular class",
            "rank": r,
            "count": 1,
            "size": _top_class_size(ctx),
            "subsemigroup": True,
        }
    else:
        out = {
            "kind": "singletons above the sandwich rank",
            "rank": [s for s in range(r + 1, ell + 1)],
            "count": sum(mmn_dclass_counts(q, m, n, s)["size"] for s in range(r + 1, ell + 1)),
            "subsemigroup": False,
        }
    out["zero semigroup"] = r == 0
    return out


def _top_class_size(ctx: SandwichContext) -> int:
    from ..combinatorics import sandwich_counts

    return sandwich_counts(ctx.q, ctx.m, ctx.n, ctx.r, ctx.r)["D_size"]


# ---------------------------------------------------------------- [M, A, N]


@dataclass(frozen=True)
class RegTriple:
    M: Matrix
    A: Matrix
    N: Matrix

    def compose(self) -> Matrix:
        from ..matrix import man_compose

        return man_compose(self.M, self.A, self.N)


def least_solution(F: Field, L: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Least solution of L x = b, comparing vectors lexicographically.

    Reduces a particular solution against the RREF basis of the kernel, so
    the result is zero at every pivot of that basis.
    """
    k, v = L.shape
    aug = np.concatenate([L, b.reshape(k, 1)], axis=1)[None]
    R, rk, piv = batch_rref(F, aug, pivot_cols=v)
    R, rk, piv = R[0], int(rk[0]), piv[0, : int(rk[0])]
    if rk < k and R[rk:, v].any():
        return None
    x = np.zeros(v, dtype=np.int64)
    x[piv] = R[:rk, v]
    free = [c for c in range(v) if c not in set(piv.tolist())]
    if free:
        basis = np.zeros((len(free), v), dtype=np.int64)
        for t, f in enumerate(free):
            basis[t, f] = 1
            basis[t, piv] = F.bneg(R[:rk, f])
        W, wr, wpiv = batch_rref(F, basis[None])
        W, wr, wpiv = W[0], int(wr[0]), wpiv[0]
        for t in range(wr):
            c = x[wpiv[t]]
            if c:
                x = F.bsub(x, F.bmul(c, W[t]))
    return x


def _solve_left(F: Field, A: np.ndarray, C: np.ndarray) -> np.ndarray | None:
    """Least M with M A = C."""
    rows, r = C.shape
    L = np.kron(np.eye(rows, dtype=np.int64), A.T)
    x = least_solution(F, L, C.reshape(-1))
    return None if x is None else x.reshape(rows, r)


def _solve_right(F: Field, A: np.ndarray, B: np.ndarray) -> np.ndarray | None:
    """Least N with A N = B."""
    r, cols = B.shape
    L = np.kron(A, np.eye(cols, dtype=np.int64))
    x = least_solution(F, L, B.reshape(-1))
    return None if x is None else x.reshape(r, cols)


def man_decompose(ctx: SandwichContext, X: Matrix) -> RegTriple:
    Xn = _normalized_stack(ctx, X)
    if not structure(ctx, Xn).in_P[0]:
        raise NotRegular("matrix is not regular in the sandwich semigroup")
    return _decompose_normalized(ctx, Xn[0])


def _decompose_normalized(ctx: SandwichContext, xn: np.ndarray) -> RegTriple:
    F, r = ctx.field, ctx.r
    A = xn[:r, :r]
    M = _solve_left(F, A, xn[r:, :r])
    N = _solve_right(F, A, xn[:r, r:])
    if M is None or N is None:  # pragma: no cover - excluded by regularity
        raise NotRegular("block equations have no solution")
    return RegTriple(
        Matrix(F, M, shape=(ctx.m - r, r)),
        Matrix(F, A, shape=(r, r)),
        Matrix(F, N, shape=(r, ctx.n - r)),
    )


def phi_project(ctx: SandwichContext, X: Matrix) -> Matrix:
    return man_decompose(ctx, X).A


@dataclass(frozen=True)
class CornerImages:
    XJ: Matrix
    JX: Matrix
    JXJ: Matrix
    XJ_regular: bool
    JX_regular: bool


def _corner_arrays(ctx: SandwichContext, xn: np.ndarray):
    r, m, n = ctx.r, ctx.m, ctx.n
    XJ = np.zeros(xn.shape[:-2] + (m, m), dtype=np.int64)
    XJ[..., :, :r] = xn[..., :, :r]
    JX = np.zeros(xn.shape[:-2] + (n, n), dtype=np.int64)
    JX[..., :r, :] = xn[..., :r, :]
    JXJ = np.zeros(xn.shape[:-2] + (n, m), dtype=np.int64)
    JXJ[..., :r, :r] = xn[..., :r, :r]
    return XJ, JX, JXJ


def corner_images(ctx: SandwichContext, X: Matrix) -> CornerImages:
    F, r = ctx.field, ctx.r
    xn = _normalized_stack(ctx, X)[0]
    XJ, JX, JXJ = _corner_arrays(ctx, xn)
    # Y in C_m(r) is regular there iff rank(J Y) = rank(Y); dually for R_n(r)
    xj_reg = batch_rank(F, XJ[None, :r, :])[0] == batch_rank(F, XJ[None])[0]
    jx_reg = batch_rank(F, JX[None, :, :r])[0] == batch_rank(F, JX[None])[0]
    return CornerImages(
        Matrix(F, XJ, shape=XJ.shape), Matrix(F, JX, shape=JX.shape), Matrix(F, JXJ, shape=JXJ.shape),
        bool(xj_reg), bool(jx_reg),
    )


def psi_embed(ctx: SandwichContext, X: Matrix) -> tuple[Matrix, Matrix]:
    """(XJ, JX) of the normalized image of a regular X."""
    if not reg_membership(ctx, X).in_P:
        raise NotRegular("psi is only defined on regular elements")
    c = corner_images(ctx, X)
    return c.XJ, c.JX


def psi_reconstruct(ctx: SandwichContext, Y: Matrix, Z: Matrix) -> Matrix:
    """The regular X with psi(X) = (Y, Z), in the context's coordinates."""
    F, r, m, n = ctx.field, ctx.r, ctx.m, ctx.n
    if Y.shape != (m, m) or Z.shape != (n, n):
        raise DimensionMismatch("expected an m x m and an n x n matrix")
    y, z = Y.array, Z.array
    if y[:, r:].any() or z[r:, :].any():
        raise NotInImage("corner matrices must have trailing zero columns / rows")
    if not np.array_equal(y[:r, :r], z[:r, :r]):
        raise NotInImage("the two corners disagree on the shared block")
    A = y[:r, :r]
    M = _solve_left(F, A, y[r:, :r])
    N = _solve_right(F, A, z[:r, r:])
    if M is None or N is None:
        raise NotInImage("corner is not the image of a regular element")
    xn = np.zeros((m, n), dtype=np.int64)
    xn[:r, :r] = A
    xn[:r, r:] = z[:r, r:]
    xn[r:, :r] = y[r:, :r]
    xn[r:, r:] = batch_matmul(F, M, z[:r, r:])
    return Matrix(F, ctx.from_normalized_array(xn), shape=(m, n))
