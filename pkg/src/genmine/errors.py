"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GenmineError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidInputError(GenmineError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(InvalidInputError):
    """A statistical routine received a sample it cannot operate on
    (constant values, all-zero differences, too few observations)."""


class BudgetExceededError(GenmineError):
    """A bounded search ran out of its expansion budget.

    Attributes:
        partial_count: number of results collected before the budget ran out.
    """

    def __init__(self, message: str, partial_count: int = 0):
        super().__init__(message)
        self.partial_count = partial_count


class TrainingDivergedError(GenmineError):
    """Training produced a non-finite loss; carries last diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BuildError(GenmineError):
    """A net builder could not satisfy its constraints (e.g. label budget)."""
