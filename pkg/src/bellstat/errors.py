"""Exception types raised across the package."""

from __future__ import annotations


class BellStatError(ValueError):
    """Base class for all package errors."""


class ParseError(BellStatError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(BellStatError):
    """A count or parameter is outside its allowed range."""


class StructuralError(BellStatError):
    """A block does not contain exactly the four setting pairs."""


class ConsistencyError(ValidationError):
    """Singles and coincidence counts contradict each other."""


class CapabilityError(BellStatError):
    """The record lacks the data an operation needs (e.g. four-detector tables)."""


class UndefinedRatioError(BellStatError):
    """The ratio statistic has a zero denominator."""


class NormalizationError(BellStatError):
    """Drift normalization cannot be computed for a run."""


class InsufficientDataError(BellStatError):
    pass


class DomainError(BellStatError):
    pass


class DegenerateError(BellStatError):
    """A statistic with zero spread was used where a positive one is required."""
