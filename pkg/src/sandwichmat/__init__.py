"""Exact computations in sandwich semigroups of matrices over finite fields.

The package works with the set of m x n matrices over GF(q) under the
product X * Y = X A Y for a fixed n x m sandwich matrix A. Everything is
computed exactly over small fields, with enumeration guarded by a budget.
"""

from .errors import SandwichError
from .field import Field, make_field, parse_field
from .matrix import Matrix
from .sandwich import SandwichContext, context_from_rank, make_context, star

__version__ = "0.1.0"

__all__ = [
    "Field",
    "Matrix",
    "SandwichContext",
    "SandwichError",
    "context_from_rank",
    "make_context",
    "make_field",
    "parse_field",
    "star",
]
