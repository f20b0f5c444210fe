"""Shared exception types, mapped to CLI exit codes in cli.py."""


class StabilisError(Exception):
    """Base class for all library errors."""


class SpecError(StabilisError):
    """Malformed or inconsistent input data (bad table, bad embedding, ...)."""


class CapExceeded(StabilisError):
    """A group/closure grew past the configured order cap."""


class BudgetExceeded(StabilisError):
    """A bounded search ran out of budget before reaching a verdict.

    Deliberately distinct from a negative answer: callers must never
    treat an exhausted search as non-membership.
    """


class NotIsomorphic(StabilisError):
    """Two actions do not have the same decomposition type."""


class VerificationError(StabilisError):
    """A certificate or relation re-check failed."""
