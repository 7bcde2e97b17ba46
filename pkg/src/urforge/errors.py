"""Exception types shared across the package."""

from __future__ import annotations


class UrforgeError(Exception):
    """Base class for all domain errors raised by this package."""


class NonUniversalError(UrforgeError):
    """Raised when an operation requires a universal distance set.

    Carries the witness (a pair of triangles that cannot be amalgamated)
    when one is available.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CompletionError(UrforgeError):
    """No admissible one-point extension exists (non-universal input)."""


class BudgetExceededError(UrforgeError):
    """A growth budget ran out.

    ``blocking`` holds the type function whose realization could not be
    afforded, when the failure is attributable to one.
    """

    def __init__(self, message, blocking=None):
        super().__init__(message)
        self.blocking = blocking
