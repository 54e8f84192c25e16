"""Exception types shared across the package."""

from __future__ import annotations

import os

DEFAULT_BUDGET = 1 << 20


def enumeration_budget(override: int | None = None) -> int:
    """Budget for exhaustive enumeration; SANDWICH_BUDGET overrides the default."""
    if override is not None:
        return int(override)
    env = os.environ.get("SANDWICH_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGET


class SandwichError(Exception):
    pass


class NonPrimeCharacteristic(SandwichError, ValueError):
    pass


class ReducibleModulus(SandwichError, ValueError):
    pass


class NonMonic(SandwichError, ValueError):
    pass


class DivideByZero(SandwichError, ZeroDivisionError):
    pass


class DomainError(SandwichError, ValueError):
    pass


class DimensionMismatch(SandwichError, ValueError):
    pass


class BudgetExceeded(SandwichError, RuntimeError):
    pass


class BadSandwichElement(SandwichError, ValueError):
    pass


class NotRegular(SandwichError, ValueError):
    pass


class NotInImage(SandwichError, ValueError):
    pass


class UnsupportedParameters(SandwichError, ValueError):
    pass


class DegenerateCase(SandwichError, ValueError):
    pass


class SearchExhausted(SandwichError, RuntimeError):
    pass


class GreedySearchFailed(SandwichError, RuntimeError):
    pass


class VerificationFailure(SandwichError, AssertionError):
    """A checked law failed; `witness` holds the offending elements."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
