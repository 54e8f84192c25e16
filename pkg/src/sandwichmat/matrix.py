"""Dense matrices over GF(q).

A single matrix is a `Matrix` value; bulk work (enumeration, closure, class
computations) uses the `batch_*` functions on int64 arrays of shape
(..., m, n) holding encoded field elements.

Matrices are encoded as integers in base q, row-major, first entry most
significant. Enumeration order is increasing code order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, DomainError, enumeration_budget
from .field import Field

__all__ = [
    "Matrix",
    "SubspaceKey",
    "mat_mul",
    "rref",
    "rank",
    "row_space_key",
    "col_space_key",
    "transpose",
    "inner_inverse",
    "inverse",
    "rank_normal_form",
    "man_compose",
    "enumerate_matrices",
    "identity",
    "zeros",
    "jmatrix",
    "block",
    "batch_encode",
    "batch_decode",
    "batch_matmul",
    "batch_rref",
    "batch_rank",
    "all_matrices",
]

_CODE_LIMIT = 1 << 62


# ---------------------------------------------------------------- batch ops


def _weights(q: int, size: int) -> np.ndarray:
    if q**size >= _CODE_LIMIT:
        raise BudgetExceeded(f"q^{size} codes do not fit in 64 bits")
    return np.array([q ** (size - 1 - i) for i in range(size)], dtype=np.int64)


def batch_encode(F: Field, arr: np.ndarray) -> np.ndarray:
    """Codes of a stack of matrices with shape (..., m, n)."""
    m, n = arr.shape[-2:]
    flat = arr.reshape(arr.shape[:-2] + (m * n,))
    if m * n == 0:
        return np.zeros(arr.shape[:-2], dtype=np.int64)
    return flat @ _weights(F.q, m * n)


def batch_decode(F: Field, codes, m: int, n: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    w = _weights(F.q, m * n)
    out = (codes[..., None] // w) % F.q
    return out.reshape(codes.shape + (m, n))


def all_matrices(F: Field, m: int, n: int, budget: int | None = None) -> np.ndarray:
    """Every m x n matrix, in code order, as an array of shape (q^{mn}, m, n)."""
    total = F.q ** (m * n)
    if total > enumeration_budget(budget):
        raise BudgetExceeded(f"{total} matrices exceed the enumeration budget")
    return batch_decode(F, np.arange(total, dtype=np.int64), m, n)


def batch_matmul(F: Field, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Broadcasting product of stacks (..., m, k) and (..., k, n)."""
    if X.shape[-1] != Y.shape[-2]:
        raise DimensionMismatch(f"cannot multiply {X.shape[-2:]} by {Y.shape[-2:]}")
    if F.is_prime_field:
        return (X @ Y) % F.p
    k = X.shape[-1]
    shape = np.broadcast_shapes(X.shape[:-2], Y.shape[:-2]) + (X.shape[-2], Y.shape[-1])
    out = np.zeros(shape, dtype=np.int64)
    for t in range(k):
        out = F.add_table[out, F.mul_table[X[..., :, t, None], Y[..., None, t, :]]]
    return out


def batch_rref(F: Field, X: np.ndarray, pivot_cols: int | None = None):
    """Reduced row echelon forms of a stack (N, m, w).

    Pivots are only sought in the first `pivot_cols` columns (all by default);
    this lets an augmented [X | I] carry the transforming matrix along.
    Returns (R, rank, pivots) where pivots[i, j] is the pivot column of row j
    or -1.
    """
    A = np.array(X, dtype=np.int64, copy=True)
    N, m, w = A.shape
    c = w if pivot_cols is None else pivot_cols
    row = np.zeros(N, dtype=np.int64)
    pivots = np.full((N, m), -1, dtype=np.int64)
    ar_m = np.arange(m)
    for col in range(c):
        if m == 0 or N == 0:
            break
        active = row < m
        if not active.any():
            break
        cand = (A[:, :, col] != 0) & (ar_m[None, :] >= row[:, None])
        has = cand.any(axis=1) & active
        if not has.any():
            continue
        idx = np.nonzero(has)[0]
        pr = np.argmax(cand[idx], axis=1)
        rr = row[idx]
        top = A[idx, pr].copy()
        A[idx, pr] = A[idx, rr]
        A[idx, rr] = top
        scale = F.binv(A[idx, rr, col])
        prow = F.bmul(scale[:, None], A[idx, rr])
        A[idx, rr] = prow
        factors = A[idx, :, col].copy()
        factors[np.arange(len(idx)), rr] = 0
        A[idx] = F.bsub(A[idx], F.bmul(factors[:, :, None], prow[:, None, :]))
        pivots[idx, rr] = col
        row[idx] += 1
    return A, row, pivots


def _flat(X: np.ndarray) -> np.ndarray:
    # explicit leading size, since -1 is ambiguous for zero-width matrices
    return X.reshape((int(np.prod(X.shape[:-2], dtype=np.int64)),) + X.shape[-2:])


def batch_rank(F: Field, X: np.ndarray) -> np.ndarray:
    lead = X.shape[:-2]
    flat = _flat(X)
    if flat.shape[1] == 0 or flat.shape[2] == 0:
        return np.zeros(lead, dtype=np.int64)
    # reduce along the shorter side
    if flat.shape[1] > flat.shape[2]:
        flat = np.swapaxes(flat, 1, 2)
    return batch_rref(F, flat)[1].reshape(lead)


def batch_row_key_codes(F: Field, X: np.ndarray) -> np.ndarray:
    """Integer keys with equal value iff equal row space (within one shape)."""
    flat = _flat(X)
    R = batch_rref(F, flat)[0]
    return batch_encode(F, R).reshape(X.shape[:-2])


def batch_col_key_codes(F: Field, X: np.ndarray) -> np.ndarray:
    return batch_row_key_codes(F, np.swapaxes(X, -1, -2))


# ---------------------------------------------------------------- Matrix


class Matrix:
    """Immutable m x n matrix over a finite field."""

    __slots__ = ("field", "_a", "_hash")

    def __init__(self, field: Field, rows, shape: tuple[int, int] | None = None):
        a = np.array(rows, dtype=np.int64)
        if shape is not None:
            a = a.reshape(shape)
        elif a.ndim != 2:
            if a.size == 0:
                raise DimensionMismatch("empty matrices need an explicit shape")
            raise DimensionMismatch("matrix entries must be a 2-d array")
        if a.size and (a.min() < 0 or a.max() >= field.q):
            raise DomainError(f"entries must lie in [0, {field.q})")
        a.setflags(write=False)
        self.field = field
        self._a = a
        self._hash = None

    @classmethod
    def _wrap(cls, field: Field, a: np.ndarray) -> "Matrix":
        out = cls.__new__(cls)
        a = np.ascontiguousarray(a, dtype=np.int64)
        a.setflags(write=False)
        out.field = field
        out._a = a
        out._hash = None
        return out

    @classmethod
    def from_code(cls, field: Field, m: int, n: int, code: int) -> "Matrix":
        entries = []
        for _ in range(m * n):
            code, d = divmod(code, field.q)
            entries.append(d)
        if code:
            raise DomainError("code out of range")
        return cls._wrap(field, np.array(entries[::-1], dtype=np.int64).reshape(m, n))

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def m(self) -> int:
        return self._a.shape[0]

    @property
    def n(self) -> int:
        return self._a.shape[1]

    @property
    def code(self) -> int:
        c = 0
        for v in self._a.flat:
            c = c * self.field.q + int(v)
        return c

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self._a, other._a))
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.field.q, self.shape, self._a.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"Matrix({self.tolist()}, q={self.field.q}, shape={self.shape})"

    def __str__(self) -> str:
        if self._a.size == 0:
            return f"[empty {self.m}x{self.n}]"
        return "\n".join(" ".join(str(v) for v in row) for row in self._a)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise DimensionMismatch("shapes differ")
        return Matrix._wrap(self.field, self.field.badd(self._a, other._a))

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise DimensionMismatch("shapes differ")
        return Matrix._wrap(self.field, self.field.bsub(self._a, other._a))

    @property
    def T(self) -> "Matrix":
        return transpose(self)

    def rank(self) -> int:
        return rank(self)

    def rref(self):
        return rref(self)

    def sub(self, rows: slice, cols: slice) -> "Matrix":
        return Matrix._wrap(self.field, self._a[rows, cols])

    def is_zero(self) -> bool:
        return not self._a.any()


@dataclass(frozen=True, order=True)
class SubspaceKey:
    """A subspace of F^ambient, stored as the RREF basis without zero rows."""

    ambient: int
    basis: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self, field: Field) -> Matrix:
        return Matrix(field, list(self.basis), shape=(self.dim, self.ambient))

    def __str__(self) -> str:
        if not self.basis:
            return "0"
        return "|".join("".join(str(v) for v in row) for row in self.basis)


def identity(field: Field, n: int) -> Matrix:
    return Matrix._wrap(field, np.eye(n, dtype=np.int64))


def zeros(field: Field, m: int, n: int) -> Matrix:
    return Matrix._wrap(field, np.zeros((m, n), dtype=np.int64))


def jmatrix(field: Field, m: int, n: int, r: int) -> Matrix:
    """The m x n matrix with I_r in the top-left corner and zeros elsewhere."""
    if r > min(m, n) or r < 0:
        raise DimensionMismatch(f"rank {r} impossible for {m}x{n}")
    a = np.zeros((m, n), dtype=np.int64)
    a[range(r), range(r)] = 1
    return Matrix._wrap(field, a)


def mat_mul(X: Matrix, Y: Matrix) -> Matrix:
    if X.n != Y.m:
        raise DimensionMismatch(f"product of {X.shape} and {Y.shape} is undefined")
    if X.field != Y.field:
        raise DomainError("matrices over different fields")
    return Matrix._wrap(X.field, batch_matmul(X.field, X.array, Y.array))


def transpose(X: Matrix) -> Matrix:
    return Matrix._wrap(X.field, X.array.T)


def rref(X: Matrix) -> tuple[Matrix, Matrix, list[int]]:
    """(R, T, pivots) with R = T X in reduced row echelon form, T invertible."""
    F, m, n = X.field, X.m, X.n
    aug = np.concatenate([X.array, np.eye(m, dtype=np.int64)], axis=1)[None]
    R, rk, piv = batch_rref(F, aug, pivot_cols=n)
    R = R[0]
    pivots = [int(c) for c in piv[0, : int(rk[0])]]
    return Matrix._wrap(F, R[:, :n]), Matrix._wrap(F, R[:, n:]), pivots


def rank(X: Matrix) -> int:
    return int(batch_rank(X.field, X.array[None])[0])


def row_space_key(X: Matrix) -> SubspaceKey:
    R, _, piv = rref(X)
    rows = tuple(tuple(int(v) for v in R.array[i]) for i in range(len(piv)))
    return SubspaceKey(X.n, rows)


def col_space_key(X: Matrix) -> SubspaceKey:
    return row_space_key(transpose(X))


def inverse(X: Matrix) -> Matrix:
    if X.m != X.n:
        raise DimensionMismatch("only square matrices can be invertible")
    R, T, piv = rref(X)
    if len(piv) != X.n:
        raise DomainError("matrix is singular")
    return T


def is_invertible(X: Matrix) -> bool:
    return X.m == X.n and rank(X) == X.n


def inner_inverse(X: Matrix) -> Matrix:
    """G with XGX = X and GXG = G, built from the pivots of rref(X)."""
    R, T, piv = rref(X)
    G0 = np.zeros((X.n, X.m), dtype=np.int64)
    for i, c in enumerate(piv):
        G0[c, i] = 1
    return mat_mul(Matrix._wrap(X.field, G0), T)


def rank_normal_form(A: Matrix) -> tuple[Matrix, Matrix, int]:
    """(U, V, r) with U, V invertible and A = U J V, J the r-corner matrix."""
    F = A.field
    R, T, piv = rref(A)
    r = len(piv)
    W = np.zeros((A.n, A.n), dtype=np.int64)
    W[:r] = R.array[:r]
    free = [c for c in range(A.n) if c not in piv]
    for i, c in enumerate(free):
        W[r + i, c] = 1
    return inverse(T), Matrix._wrap(F, W), r


def block(A: Matrix, B: Matrix, C: Matrix, D: Matrix) -> Matrix:
    """The 2 x 2 block matrix [A B; C D]."""
    if A.m != B.m or C.m != D.m or A.n != C.n or B.n != D.n:
        raise DimensionMismatch("inconsistent block shapes")
    top = np.concatenate([A.array, B.array], axis=1)
    bottom = np.concatenate([C.array, D.array], axis=1)
    return Matrix._wrap(A.field, np.concatenate([top, bottom], axis=0))


def man_compose(M: Matrix, A: Matrix, N: Matrix) -> Matrix:
    """The block matrix [A, AN; MA, MAN]."""
    if A.m != A.n or M.n != A.m or N.m != A.m:
        raise DimensionMismatch("blocks must be (m-r)xr, rxr, rx(n-r)")
    AN = mat_mul(A, N)
    MA = mat_mul(M, A)
    return block(A, AN, MA, mat_mul(MA, N))


def enumerate_matrices(
    field: Field, m: int, n: int, rank_filter=None, budget: int | None = None, chunk: int = 1 << 14
) -> Iterator[Matrix]:
    """All m x n matrices in code order; `rank_filter` is an int or a predicate on rank."""
    total = field.q ** (m * n)
    if total > enumeration_budget(budget):
        raise BudgetExceeded(f"{total} matrices exceed the enumeration budget")
    if isinstance(rank_filter, int):
        wanted = rank_filter
        rank_filter = lambda s: s == wanted  # noqa: E731
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        arr = batch_decode(field, codes, m, n)
        if rank_filter is not None:
            ranks = batch_rank(field, arr)
            keep = np.array([bool(rank_filter(int(s))) for s in ranks], dtype=bool)
            arr = arr[keep]
        for a in arr:
            yield Matrix._wrap(field, a)


def stack(mats: list[Matrix], m: int | None = None, n: int | None = None) -> np.ndarray:
    """Stack Matrix values into an (N, m, n) array."""
    if not mats:
        return np.zeros((0, m or 0, n or 0), dtype=np.int64)
    return np.stack([X.array for X in mats])


def unstack(field: Field, arr: np.ndarray) -> list[Matrix]:
    return [Matrix._wrap(field, a) for a in arr]
