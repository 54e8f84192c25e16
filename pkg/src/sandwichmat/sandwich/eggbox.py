"""Eggbox diagrams: D-classes as grids of R- and L-classes.

Classes are ordered by their canonical keys, so output is reproducible
byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import DomainError
from ..matrix import batch_col_key_codes, batch_encode, batch_matmul, batch_rank, batch_row_key_codes
from .context import SandwichContext, _key_rows, dclass_leq_matrix, structure
from .regular import regular_elements

__all__ = ["Cell", "DClassGrid", "EggboxReport", "eggbox", "parse_scope"]

_CASE_NAMES = ("single", "col", "row", "pair", "rank")


@dataclass
class Cell:
    size: int
    is_group: bool | None
    n_idempotents: int | None


@dataclass
class DClassGrid:
    s: int
    regular: bool
    key: str
    r_keys: list
    l_keys: list
    cells: list  # cells[i][j] for R-class i and L-class j

    @property
    def nR(self) -> int:
        return len(self.r_keys)

    @property
    def nL(self) -> int:
        return len(self.l_keys)

    @property
    def size(self) -> int:
        return sum(c.size for row in self.cells for c in row)

    @property
    def h_sizes(self) -> list:
        return sorted({c.size for row in self.cells for c in row})

    @property
    def idempotents(self) -> int | None:
        vals = [c.n_idempotents for row in self.cells for c in row]
        return None if any(v is None for v in vals) else sum(vals)

    def as_dict(self) -> dict:
        hs = self.h_sizes
        return {
            "s": self.s,
            "key": self.key,
            "regular": self.regular,
            "nR": self.nR,
            "nL": self.nL,
            "hSize": hs[0] if len(hs) == 1 else hs,
            "idempotents": self.idempotents,
            "size": self.size,
            "rKeys": self.r_keys,
            "lKeys": self.l_keys,
            "cells": [[[c.size, c.is_group, c.n_idempotents] for c in row] for row in self.cells],
        }


@dataclass
class EggboxReport:
    params: dict
    scope: str
    dclasses: list
    order: list = dc_field(default_factory=list)  # covering pairs (lower, upper)

    def as_dict(self) -> dict:
        return {
            "params": self.params,
            "scope": self.scope,
            "dclasses": [d.as_dict() for d in self.dclasses],
            "order": [list(e) for e in self.order],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "dclass", "rKey", "lKey", "size", "isGroup", "nIdempotents"])
        for d in self.dclasses:
            for i, rk in enumerate(d.r_keys):
                for j, lk in enumerate(d.l_keys):
                    c = d.cells[i][j]
                    w.writerow([d.s, d.key, rk, lk, c.size, _fmt(c.is_group), _fmt(c.n_idempotents)])
        return buf.getvalue()

    def to_dot(self) -> str:
        p = self.params
        lines = [
            "digraph eggbox {",
            f'  label="q={p["q"]} m={p["m"]} n={p["n"]} r={p["r"]} scope={self.scope}";',
            "  node [shape=plaintext];",
            "  rankdir=BT;",
        ]
        for idx, d in enumerate(self.dclasses):
            rows = []
            for row in d.cells:
                tds = []
                for c in row:
                    shade = ' BGCOLOR="gray80"' if c.is_group else ""
                    tds.append(f"<TD{shade}>{c.size}</TD>")
                rows.append("<TR>" + "".join(tds) + "</TR>")
            caption = f'<TR><TD COLSPAN="{max(d.nL, 1)}">rank {d.s}{"" if d.regular else ", non-regular"}</TD></TR>'
            table = '<TABLE BORDER="0" CELLBORDER="1" CELLSPACING="0">' + caption + "".join(rows) + "</TABLE>"
            lines.append(f"  d{idx} [label=<{table}>];")
        for lo, hi in self.order:
            lines.append(f"  d{lo} -> d{hi};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        p = self.params
        out = [f"eggbox q={p['q']} m={p['m']} n={p['n']} r={p['r']} scope={self.scope}",
               f"{len(self.dclasses)} D-classes"]
        for idx, d in enumerate(self.dclasses):
            tag = "regular" if d.regular else "non-regular"
            out.append(f"[{idx}] rank {d.s} {tag}: {d.nR} x {d.nL}, H sizes {d.h_sizes}, "
                       f"size {d.size}, idempotents {_fmt(d.idempotents)}")
            if d.nR * d.nL <= 400:
                for row in d.cells:
                    out.append("    " + " ".join(f"{c.size}{'*' if c.is_group else ''}" for c in row))
        if self.order:
            out.append("order: " + ", ".join(f"{a}<{b}" for a, b in self.order))
        return "\n".join(out) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "dot":
            return self.to_dot()
        if fmt == "text":
            return self.to_text()
        raise DomainError(f"unknown format {fmt!r}")


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def parse_scope(scope: str) -> tuple[str, int | None]:
    """"all", "reg", "dclass:s" (regular class of rank s) or "mdclass:s"."""
    text = scope.strip()
    if text in ("all", "reg"):
        return text, None
    for kind in ("dclass", "mdclass"):
        for sep in (":", "("):
            if text.startswith(kind + sep):
                try:
                    return kind, int(text[len(kind) + 1:].rstrip(")"))
                except ValueError:
                    break
    raise DomainError(f"unknown scope {scope!r}")


def _key_strings(rows: np.ndarray) -> list[str]:
    out = []
    for case, a, b in rows:
        name = _CASE_NAMES[int(case)]
        out.append(f"{name}:{a}.{b}" if name == "pair" else f"{name}:{a}")
    return out


def _unique_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted distinct key rows and the index of each input row."""
    uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    return uniq, inv.reshape(-1)


def _grids(ctx: SandwichContext, X: np.ndarray, order: bool) -> EggboxReport:
    """Sandwich-semigroup eggbox of the D-classes met by the stack X."""
    F = ctx.field
    Xn = ctx.to_normalized_array(X)
    st = structure(ctx, Xn)
    keys = {k: _key_rows(st, k) for k in ("R", "L", "H", "D")}
    idem = batch_encode(F, ctx.star_array(X, X)) == batch_encode(F, X)
    dkeys, dinv = _unique_rows(keys["D"])
    grids, reps = [], []
    for d in range(len(dkeys)):
        idx = np.nonzero(dinv == d)[0]
        rk, rinv = _unique_rows(keys["R"][idx])
        lk, linv = _unique_rows(keys["L"][idx])
        size = np.zeros((len(rk), len(lk)), dtype=np.int64)
        nid = np.zeros((len(rk), len(lk)), dtype=np.int64)
        np.add.at(size, (rinv, linv), 1)
        np.add.at(nid, (rinv, linv), idem[idx].astype(np.int64))
        cells = [[Cell(int(size[i, j]), bool(nid[i, j] > 0), int(nid[i, j])) for j in range(len(lk))]
                 for i in range(len(rk))]
        grids.append(DClassGrid(
            s=int(st.rank[idx[0]]),
            regular=bool(st.in_P[idx[0]]),
            key=_key_strings(dkeys[d:d + 1])[0],
            r_keys=_key_strings(rk),
            l_keys=_key_strings(lk),
            cells=cells,
        ))
        reps.append(idx[0])
    # regular classes by rank first, then the rest by key
    perm = sorted(range(len(grids)), key=lambda i: (not grids[i].regular, grids[i].s, grids[i].key))
    grids = [grids[i] for i in perm]
    reps = np.array([reps[i] for i in perm], dtype=np.int64)
    rep = EggboxReport(ctx.params(), "", grids)
    if order and len(grids) > 1:
        rep.order = _covering(dclass_leq_matrix(ctx, Xn[reps], Xn[reps]))
    return rep


def _covering(leq: np.ndarray) -> list:
    lt = leq & ~np.eye(len(leq), dtype=bool)
    lt_f = lt.astype(np.float32)
    two_step = (lt_f @ lt_f) > 0
    cover = lt & ~two_step
    return [(int(a), int(b)) for a, b in np.argwhere(cover)]


def _matrix_dclass(ctx: SandwichContext, s: int, budget: int | None) -> EggboxReport:
    """The ordinary D-class of rank-s matrices: rows by column space, columns by row space."""
    F, m, n = ctx.field, ctx.m, ctx.n
    if not 0 <= s <= min(m, n):
        raise DomainError(f"rank {s} impossible for {m}x{n} matrices")
    X = ctx.all_elements(budget)
    X = X[batch_rank(F, X) == s]
    ck, cinv = np.unique(batch_col_key_codes(F, X), return_inverse=True)
    rk, rinv = np.unique(batch_row_key_codes(F, X), return_inverse=True)
    cinv, rinv = cinv.reshape(-1), rinv.reshape(-1)
    size = np.zeros((len(ck), len(rk)), dtype=np.int64)
    np.add.at(size, (cinv, rinv), 1)
    square = m == n
    if square:
        idem = batch_encode(F, batch_matmul(F, X, X)) == batch_encode(F, X)
        nid = np.zeros_like(size)
        np.add.at(nid, (cinv, rinv), idem.astype(np.int64))
    cells = [[Cell(int(size[i, j]), bool(nid[i, j] > 0) if square else None, int(nid[i, j]) if square else None)
              for j in range(len(rk))] for i in range(len(ck))]
    grid = DClassGrid(s=s, regular=True, key=f"mrank:{s}",
                      r_keys=[f"col:{c}" for c in ck], l_keys=[f"row:{c}" for c in rk], cells=cells)
    return EggboxReport(ctx.params(), f"mdclass:{s}", [grid])


def eggbox(ctx: SandwichContext, scope: str = "reg", budget: int | None = None, order: bool = True) -> EggboxReport:
    """Eggbox report for a scope.

    "all" covers every element, "reg" the regular elements, "dclass:s" the
    regular D-class of rank s, and "mdclass:s" the ordinary D-class of
    rank-s matrices under the plain matrix product.
    """
    kind, s = parse_scope(scope)
    if kind == "mdclass":
        return _matrix_dclass(ctx, s, budget)
    if kind == "all":
        X = ctx.all_elements(budget)
    elif kind == "reg":
        X = regular_elements(ctx, budget=budget)
    else:
        if not 0 <= s <= ctx.r:
            raise DomainError(f"no regular D-class of rank {s} when r = {ctx.r}")
        X = regular_elements(ctx, s, budget=budget)
    rep = _grids(ctx, X, order)
    rep.scope = scope
    return rep
