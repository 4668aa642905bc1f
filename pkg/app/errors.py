# app/errors.py
from __future__ import annotations


class InvalidInputError(ValueError):
    """Malformed input or mismatched dimensions."""


class CapExceededError(InvalidInputError):
    """A compiled or configured size cap was exceeded."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class NotModularError(PreconditionError):
    """The quadratic form is degenerate, so its category is not modular."""


class VerificationError(RuntimeError):
    """An internal self-check failed. Seeing this means a bug, not bad input."""
