"""Exception hierarchy shared by every combfit module."""

from __future__ import annotations


class CombfitError(Exception):
    """Base class for all errors raised by combfit."""


class DomainError(CombfitError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ShapeError(CombfitError, ValueError):
    """Array dimensions do not agree."""


class FactorizationError(CombfitError, ValueError):
    """Cholesky factorization failed; ``pivot`` is the offending 0-based index."""

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class InsufficientPositives(CombfitError, ValueError):
    """A column holds too few positive claims to fit a severity."""


class LikelihoodUnderflow(CombfitError, ArithmeticError):
    """A log-likelihood contribution evaluated to -inf."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class ParseError(CombfitError, ValueError):
    """Input file could not be parsed into a claim series."""


class BootstrapUnstable(CombfitError, RuntimeError):
    """Too many bootstrap replicas failed to refit."""


class SamplerStarved(CombfitError, RuntimeError):
    """Rejection sampling acceptance fell below the usable floor."""

    def __init__(self, message: str, subset: tuple[int, ...] | None = None):
        super().__init__(message)
        self.subset = subset


class ParameterError(CombfitError, ValueError):
    """Model parameters are inconsistent (e.g. negative induced intensity)."""
