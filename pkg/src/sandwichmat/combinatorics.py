"""Closed-form counts for matrix semigroups over GF(q).

All values are exact Python integers.
"""

from __future__ import annotations

from math import comb

from .errors import DomainError, UnsupportedParameters

__all__ = [
    "q_integer",
    "q_factorial",
    "q_binomial",
    "gl_order",
    "mmn_dclass_counts",
    "sandwich_counts",
    "sandwich_size_regular",
    "idempotent_counts",
    "rank_formulas",
    "parse_target",
]


def _check_q(q: int) -> None:
    if q < 2:
        raise DomainError("q must be at least 2")


def q_integer(q: int, i: int) -> int:
    """1 + q + ... + q^{i-1}."""
    return sum(q**t for t in range(i))


def q_factorial(q: int, s: int) -> int:
    _check_q(q)
    if s < 0:
        raise DomainError("s must be non-negative")
    out = 1
    for i in range(1, s + 1):
        out *= q_integer(q, i)
    return out


def q_binomial(q: int, m: int, s: int) -> int:
    """Number of s-dimensional subspaces of GF(q)^m."""
    _check_q(q)
    if not 0 <= s <= m:
        raise DomainError(f"need 0 <= s <= m, got m={m}, s={s}")
    num = den = 1
    for i in range(s):
        num *= q ** (m - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def gl_order(q: int, s: int) -> int:
    _check_q(q)
    if s < 0:
        raise DomainError("s must be non-negative")
    return q ** comb(s, 2) * (q - 1) ** s * q_factorial(q, s)


def mmn_dclass_counts(q: int, m: int, n: int, s: int) -> dict:
    """Class counts of the rank-s matrices in M_mn."""
    if not 0 <= s <= min(m, n):
        raise DomainError(f"rank {s} impossible for {m}x{n} matrices")
    nR, nL, h = q_binomial(q, m, s), q_binomial(q, n, s), gl_order(q, s)
    return {"nR": nR, "nL": nL, "nH": nR * nL, "hSize": h, "size": nR * nL * h}


def _check_srmn(m: int, n: int, r: int, s: int) -> None:
    if not 0 <= r <= min(m, n):
        raise DomainError(f"rank {r} impossible for {n}x{m} sandwich matrices")
    if not 0 <= s <= r:
        raise DomainError(f"need 0 <= s <= r, got s={s}, r={r}")


def sandwich_counts(q: int, m: int, n: int, r: int, s: int) -> dict:
    """Sizes and counts of Green's classes in the regular rank-s class D_s
    of the sandwich semigroup with rank-r sandwich matrix."""
    _check_q(q)
    _check_srmn(m, n, r, s)
    g = gl_order(q, s)
    b = q_binomial(q, r, s)
    out = {
        "R_size": q ** (s * (n - r)) * g * b,
        "L_size": q ** (s * (m - r)) * g * b,
        "H_size": g,
        "nR": q ** (s * (m - r)) * b,
        "nL": q ** (s * (n - r)) * b,
        "nH": q ** (s * (m + n - 2 * r)) * b * b,
        "D_size": q ** (s * (m + n - 2 * r)) * g * b * b,
        # classes of the rank-s matrices of M_r, inflated
        "nR_hat": b,
        "nL_hat": b,
        "nH_hat": b * b,
        "H_per_hat": q ** (s * (m + n - 2 * r)),
    }
    out["P_size"] = sandwich_size_regular(q, m, n, r)
    return out


def sandwich_size_regular(q: int, m: int, n: int, r: int) -> int:
    """Number of regular elements."""
    _check_q(q)
    _check_srmn(m, n, r, 0)
    return sum(
        q ** (s * (m + n - 2 * r)) * gl_order(q, s) * q_binomial(q, r, s) ** 2 for s in range(r + 1)
    )


def idempotent_counts(q: int, m: int, n: int, r: int, s: int | None = None, *, square: bool = False) -> int:
    """Idempotents of rank s (all ranks when s is None).

    With square=True, count idempotents of rank s in the full matrix monoid
    M_r instead (m and n are then ignored).
    """
    _check_q(q)
    if square:
        _check_srmn(r, r, r, 0 if s is None else s)
        ranks = range(r + 1) if s is None else [s]
        return sum(q ** (t * (r - t)) * q_binomial(q, r, t) for t in ranks)
    _check_srmn(m, n, r, 0 if s is None else s)
    ranks = range(r + 1) if s is None else [s]
    return sum(q ** (t * (m + n - r - t)) * q_binomial(q, r, t) for t in ranks)


def parse_target(target: str) -> tuple[str, int | None]:
    """"full", "reg", "idem" or "ideal:s" / "ideal(s)"."""
    t = str(target).strip()
    if t in ("full", "reg", "idem"):
        return t, None
    for pre in ("ideal:", "ideal(", "ideal"):
        if t.startswith(pre):
            body = t[len(pre):].rstrip(")")
            try:
                return "ideal", int(body)
            except ValueError:
                break
    raise DomainError(f"unknown target {target!r}")


def rank_formulas(q: int, m: int, n: int, r: int, target: str = "full") -> int:
    """Rank (or idempotent rank) of the sandwich semigroup or one of its
    regular subsemigroups, where the closed forms apply."""
    _check_q(q)
    kind, s = parse_target(target)
    ell, L = min(m, n), max(m, n)
    if not 0 <= r <= ell:
        raise DomainError(f"rank {r} impossible for {n}x{m} sandwich matrices")
    square_full = r == m == n
    if kind == "full":
        if square_full:
            # the matrix monoid M_n itself
            if n == 1:
                raise UnsupportedParameters("rank of M_1 is outside the stated range n >= 2")
            return 3
        if r < ell:
            return sum(mmn_dclass_counts(q, m, n, t)["size"] for t in range(r + 1, ell + 1))
        return q_binomial(q, L, ell)
    if square_full:
        raise UnsupportedParameters("the case r = m = n is the matrix monoid, not covered here")
    if r == 0:
        raise UnsupportedParameters("r = 0 gives a zero semigroup")
    if kind == "reg":
        return q ** (r * (L - r)) + 1
    if kind == "idem":
        return q ** (r * (L - r)) + (q**r - 1) // (q - 1)
    if s is None or not 0 <= s <= r:
        raise UnsupportedParameters(f"ideal rank must satisfy 0 <= s <= r, got {s}")
    if s == r:
        return rank_formulas(q, m, n, r, "reg")
    return q ** (s * (L - r)) * q_binomial(q, r, s)
