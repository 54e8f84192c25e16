"""Plain-text formats for matrices and partial-semigroup tables.

Matrix: a header line "m n <field literal>" followed by m lines of n
space-separated element codes. Empty matrices have no entry lines. Several
matrices in one file are separated by blank lines. Lines starting with "#"
are comments.

Table: a line "n" followed by n lines of n product indices, -1 where the
product is undefined.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DomainError
from .field import Field, parse_field
from .matrix import Matrix


def format_matrix(X: Matrix) -> str:
    lines = [f"{X.m} {X.n} {X.field.literal}"]
    if X.m and X.n:
        lines += [" ".join(str(v) for v in row) for row in X.tolist()]
    return "\n".join(lines) + "\n"


def _parse_block(lines: list[str], field: Field | None) -> Matrix:
    head = lines[0].split()
    if len(head) != 3:
        raise DomainError(f"bad matrix header {lines[0]!r}")
    m, n = int(head[0]), int(head[1])
    F = parse_field(head[2])
    if field is not None and F != field:
        raise DomainError(f"matrix is over {F}, expected {field}")
    body = lines[1:]
    if m * n == 0:
        if any(line.strip() for line in body):
            raise DomainError("empty matrix must have no entry lines")
        return Matrix(F, np.zeros((m, n), dtype=np.int64), shape=(m, n))
    if len(body) != m:
        raise DomainError(f"expected {m} rows, found {len(body)}")
    rows = [[int(v) for v in line.split()] for line in body]
    if any(len(row) != n for row in rows):
        raise DomainError(f"expected {n} entries per row")
    return Matrix(F, rows, shape=(m, n))


def parse_matrices(text: str, field: Field | None = None) -> list[Matrix]:
    blocks, cur = [], []
    for line in text.splitlines():
        if line.lstrip().startswith("#"):
            continue
        if line.strip():
            cur.append(line.strip())
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    # an empty-matrix header followed directly by the next header splits on headers
    out = []
    for blk in blocks:
        i = 0
        while i < len(blk):
            m, n = (int(t) for t in blk[i].split()[:2])
            take = m if m * n else 0
            out.append(_parse_block(blk[i : i + 1 + take], field))
            i += 1 + take
    return out


def parse_matrix(text: str, field: Field | None = None) -> Matrix:
    mats = parse_matrices(text, field)
    if len(mats) != 1:
        raise DomainError(f"expected one matrix, found {len(mats)}")
    return mats[0]


def format_matrices(mats) -> str:
    return "\n".join(format_matrix(X) for X in mats)


def read_matrix(path, field: Field | None = None) -> Matrix:
    return parse_matrix(Path(path).read_text(), field)


def write_matrix(path, X: Matrix) -> None:
    Path(path).write_text(format_matrix(X))


def parse_table(text: str) -> np.ndarray:
    tokens = text.split()
    if not tokens:
        raise DomainError("empty table")
    n = int(tokens[0])
    vals = [int(t) for t in tokens[1:]]
    if len(vals) != n * n:
        raise DomainError(f"expected {n * n} table entries, found {len(vals)}")
    table = np.array(vals, dtype=np.int64).reshape(n, n)
    if table.size and (table.min() < -1 or table.max() >= n):
        raise DomainError("table entries must lie in [-1, n)")
    return table


def format_table(table: np.ndarray) -> str:
    n = len(table)
    return "\n".join([str(n)] + [" ".join(str(int(v)) for v in row) for row in table]) + "\n"
