"""Isomorphism classification of finite sandwich semigroups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BudgetExceeded, DomainError, enumeration_budget
from ..field import field_isomorphism
from ..matrix import batch_decode, batch_encode
from .context import SandwichContext

__all__ = ["IsoResult", "classify_iso", "verify_witness"]


@dataclass
class IsoResult:
    isomorphic: bool
    reason: str
    # mapping[code of X in the left semigroup] = code of its image, when built
    mapping: np.ndarray | None = None
    witness: str | None = None

    def as_dict(self) -> dict:
        return {
            "isomorphic": self.isomorphic,
            "reason": self.reason,
            "witness": self.witness,
            "witness_size": None if self.mapping is None else int(len(self.mapping)),
        }


def classify_iso(left: SandwichContext, right: SandwichContext, build_witness: bool = True,
                 budget: int | None = None) -> IsoResult:
    """Decide whether two sandwich semigroups over finite fields are isomorphic.

    With sandwich ranks r and s: isomorphic iff r = s = 0 and the sizes
    agree, or r = s >= 1 with equal shapes and equal field orders.
    """
    r, s = left.r, right.r
    if r != s:
        return IsoResult(False, f"sandwich ranks differ ({r} vs {s})")
    if r == 0:
        if left.size != right.size:
            return IsoResult(False, f"zero semigroups of different sizes ({left.size} vs {right.size})")
        res = IsoResult(True, f"both are zero semigroups of size {left.size}")
        if build_witness:
            _check_budget(left.size, budget)
            # any bijection fixing zero works; codes put O first on both sides
            res.mapping = np.arange(left.size, dtype=np.int64)
            res.witness = "code-order bijection sending O to O"
        return res
    if (left.m, left.n) != (right.m, right.n):
        return IsoResult(False, f"shapes differ ({left.m}x{left.n} vs {right.m}x{right.n})")
    if left.q != right.q:
        return IsoResult(False, f"field orders differ ({left.q} vs {right.q})")
    res = IsoResult(True, f"equal rank {r}, shape {left.m}x{left.n} and field order {left.q}")
    if build_witness:
        _check_budget(left.size, budget)
        res.mapping = _normalizing_map(left, right)
        res.witness = "normalize on the left, transport the field, denormalize on the right"
    return res


def _check_budget(size: int, budget: int | None) -> None:
    if size > enumeration_budget(budget):
        raise BudgetExceeded(f"witness over {size} elements exceeds the budget")


def _normalizing_map(left: SandwichContext, right: SandwichContext) -> np.ndarray:
    emap = field_isomorphism(left.field, right.field)
    if emap is None:  # pragma: no cover - guarded by the q test
        raise DomainError("fields are not isomorphic")
    X = left.all_elements()
    Xn = left.to_normalized_array(X)
    Yn = emap[Xn]
    Y = right.from_normalized_array(Yn)
    return batch_encode(right.field, Y)


def verify_witness(left: SandwichContext, right: SandwichContext, mapping: np.ndarray,
                   chunk: int = 1 << 18) -> tuple[bool, str]:
    """Exhaustively check that `mapping` is a bijective homomorphism."""
    N = left.size
    if len(mapping) != N or right.size != N:
        return False, "sizes differ"
    if len(np.unique(mapping)) != N:
        return False, "not injective"
    X = left.all_elements()
    Y = batch_decode(right.field, mapping, right.m, right.n)
    step = max(1, chunk // N)
    for start in range(0, N, step):
        sl = slice(start, start + step)
        lhs = mapping[batch_encode(left.field, left.star_array(X[sl, None], X[None]))]
        rhs = batch_encode(right.field, right.star_array(Y[sl, None], Y[None]))
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            i, j = bad[0]
            return False, f"product of codes {start + i} and {j} not preserved"
    return True, "bijective homomorphism"
