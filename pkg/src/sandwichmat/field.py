"""Finite fields GF(p^k) with elements encoded as integers in [0, q).

An element a0 + a1*x + ... + a_{k-1}*x^{k-1} is stored as a0 + a1*p + ...
Scalar operations go through precomputed tables; the tables themselves are
built from plain polynomial multiply-and-reduce.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .errors import DivideByZero, DomainError, NonMonic, NonPrimeCharacteristic, ReducibleModulus

MAX_ORDER = 256

__all__ = [
    "Field",
    "make_field",
    "parse_field",
    "is_prime",
    "is_irreducible",
    "enumerate_field",
    "field_arith",
    "field_isomorphism",
]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def _trim(poly: list[int]) -> list[int]:
    poly = list(poly)
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial b over GF(p)."""
    a = _trim([c % p for c in a])
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        lead = a[-1]
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - lead * c) % p
        a = _trim(a)
    return a


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _check_monic(p: int, poly) -> list[int]:
    poly = [int(c) % p for c in poly]
    if len(poly) < 2 or poly[-1] != 1:
        raise NonMonic(f"polynomial {poly} is not monic of degree >= 1")
    return poly


def is_irreducible(p: int, poly) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    if not is_prime(p):
        raise NonPrimeCharacteristic(f"{p} is not prime")
    poly = _check_monic(p, poly)
    deg = len(poly) - 1
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            divisor = list(low) + [1]
            if not _poly_mod(poly, divisor, p):
                return False
    return True


def _least_irreducible(p: int, k: int) -> tuple[int, ...]:
    # least in the order of the integer sum c_i p^i, i.e. comparing from x^{k-1} down
    for code in range(p**k):
        low = [(code // p**i) % p for i in range(k)]
        poly = low + [1]
        if is_irreducible(p, poly):
            return tuple(poly)
    raise ReducibleModulus(f"no irreducible polynomial of degree {k} over GF({p})")  # pragma: no cover


@dataclass(frozen=True)
class Field:
    """GF(p^k); instances are immutable and compare by (p, k, modulus)."""

    p: int
    k: int
    modulus: tuple[int, ...]
    add_table: np.ndarray = dc_field(init=False, repr=False, compare=False)
    mul_table: np.ndarray = dc_field(init=False, repr=False, compare=False)
    neg_table: np.ndarray = dc_field(init=False, repr=False, compare=False)
    inv_table: np.ndarray = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = self.q
        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        digits = [self._digits(a) for a in range(q)]
        for a in range(q):
            for b in range(q):
                add[a, b] = self._from_digits([(x + y) % self.p for x, y in zip(digits[a], digits[b])])
                mul[a, b] = self._poly_product(digits[a], digits[b])
        neg = np.array([self._from_digits([(-x) % self.p for x in digits[a]]) for a in range(q)], dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        for name, tab in (("add_table", add), ("mul_table", mul), ("neg_table", neg), ("inv_table", inv)):
            tab.setflags(write=False)
            object.__setattr__(self, name, tab)

    @property
    def q(self) -> int:
        return self.p**self.k

    @property
    def is_prime_field(self) -> bool:
        return self.k == 1

    @property
    def literal(self) -> str:
        if self.k == 1:
            return str(self.p)
        return f"{self.p}^{self.k}/" + ",".join(str(c) for c in self.modulus)

    def __str__(self) -> str:
        return f"GF({self.q})"

    def _digits(self, a: int) -> list[int]:
        return [(a // self.p**i) % self.p for i in range(self.k)]

    def _from_digits(self, digits) -> int:
        return sum(int(c) * self.p**i for i, c in enumerate(digits))

    def _poly_product(self, a: list[int], b: list[int]) -> int:
        if self.k == 1:
            return (a[0] * b[0]) % self.p
        prod = _poly_mod(_poly_mul(_trim(a), _trim(b), self.p), list(self.modulus), self.p)
        return self._from_digits(prod)

    def elements(self) -> list[int]:
        return list(range(self.q))

    def check(self, a: int) -> int:
        a = int(a)
        if not 0 <= a < self.q:
            raise DomainError(f"{a} is not an element of {self}")
        return a

    # scalar arithmetic
    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivideByZero("inverse of zero")
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        out = 1
        for _ in range(e):
            out = self.mul(out, a)
        return out

    def mult_order(self, a: int) -> int:
        if a == 0:
            raise DivideByZero("zero has no multiplicative order")
        x, k = a, 1
        while x != 1:
            x, k = self.mul(x, a), k + 1
        return k

    # array arithmetic (entries are int64 arrays of encoded elements)
    def badd(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        return self.add_table[a, b]

    def bsub(self, a, b):
        if self.k == 1:
            return (a - b) % self.p
        return self.add_table[a, self.neg_table[b]]

    def bmul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        return self.mul_table[a, b]

    def bneg(self, a):
        return self.neg_table[a]

    def binv(self, a):
        return self.inv_table[a]


@lru_cache(maxsize=None)
def _cached_field(p: int, k: int, modulus: tuple[int, ...]) -> Field:
    return Field(p, k, modulus)


def make_field(p: int, k: int = 1, modulus=None) -> Field:
    """Validated GF(p^k); without a modulus the least irreducible one is chosen."""
    p, k = int(p), int(k)
    if not is_prime(p):
        raise NonPrimeCharacteristic(f"{p} is not prime")
    if k < 1:
        raise DomainError("extension degree must be at least 1")
    if p**k > MAX_ORDER:
        raise DomainError(f"q = {p}^{k} exceeds the supported maximum {MAX_ORDER}")
    if k == 1:
        return _cached_field(p, 1, (0, 1))
    if modulus is None:
        poly = _least_irreducible(p, k)
    else:
        poly = tuple(_check_monic(p, modulus))
        if len(poly) != k + 1:
            raise DomainError(f"modulus must have degree {k}")
        if not is_irreducible(p, poly):
            raise ReducibleModulus(f"{list(poly)} is reducible over GF({p})")
    return _cached_field(p, k, tuple(poly))


def parse_field(text: str) -> Field:
    """Parse a field literal: "p", "p^k" or "p^k/c0,...,ck"."""
    text = str(text).strip()
    modulus = None
    if "/" in text:
        text, mod_text = text.split("/", 1)
        modulus = [int(c) for c in mod_text.split(",")]
    if "^" in text:
        p_text, k_text = text.split("^", 1)
        return make_field(int(p_text), int(k_text), modulus)
    q = int(text)
    if is_prime(q):
        return make_field(q)
    # a bare prime power such as "4" is accepted as p^k
    for p in range(2, q + 1):
        if is_prime(p) and q % p == 0:
            k, rest = 0, q
            while rest % p == 0:
                rest //= p
                k += 1
            if rest == 1 and modulus is None:
                return make_field(p, k)
            break
    raise NonPrimeCharacteristic(f"{q} is not a prime power")


def enumerate_field(F: Field) -> list[int]:
    return F.elements()


def field_arith(F: Field, a: int, b: int | None, op: str) -> int:
    a = F.check(a)
    if op == "neg":
        return F.neg(a)
    if op == "inv":
        return F.inv(a)
    b = F.check(b)
    if op == "add":
        return F.add(a, b)
    if op == "mul":
        return F.mul(a, b)
    if op == "sub":
        return F.sub(a, b)
    raise DomainError(f"unknown operation {op!r}")


def field_isomorphism(F1: Field, F2: Field) -> np.ndarray | None:
    """Element map F1 -> F2 preserving + and *, or None when q differs."""
    if (F1.p, F1.k) != (F2.p, F2.k):
        return None
    if F1 == F2:
        return np.arange(F1.q, dtype=np.int64)
    # send x to a root of F1's modulus inside F2
    for root in range(F2.q):
        val = 0
        for c in reversed(F1.modulus):
            val = F2.add(F2.mul(val, root), c)
        if val == 0:
            break
    else:  # pragma: no cover - an irreducible of degree k always splits in GF(p^k)
        return None
    powers = [1]
    for _ in range(1, F1.k):
        powers.append(F2.mul(powers[-1], root))
    image = np.zeros(F1.q, dtype=np.int64)
    for a in range(F1.q):
        val = 0
        for c, pw in zip(F1._digits(a), powers):
            val = F2.add(val, F2.mul(c, pw))
        image[a] = val
    return image
