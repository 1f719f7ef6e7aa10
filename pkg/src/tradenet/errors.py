"""Exception hierarchy.

Every error carries a short ``code`` (the class name) used by the CLI in its
``error[<CODE>]:`` prefix, and an ``exit_status``.
"""

from __future__ import annotations


class TradenetError(Exception):
    """Base class for all errors raised by this package."""

    exit_status = 2

    @property
    def code(self) -> str:
        return type(self).__name__

    def add_context(self, context: str) -> "TradenetError":
        """Prefix the message with ``context`` (e.g. the offending year)."""
        if self.args:
            self.args = (f"{context}: {self.args[0]}",) + self.args[1:]
        else:
            self.args = (context,)
        return self


class DataError(TradenetError, ValueError):
    """Input data violates a precondition."""


# netcore
class UnknownCountry(DataError):
    pass


class DuplicateFlow(DataError):
    pass


class SelfLoop(DataError):
    pass


class NegativeValue(DataError):
    pass


class AllZeroMatrix(DataError):
    pass


class IndexMismatch(DataError):
    pass


# centrality
class SolverError(TradenetError, ArithmeticError):
    pass


class NoConvergence(SolverError):
    """Power iteration did not settle within the sweep budget."""

    exit_status = 3

    def __init__(self, message: str, last_iterate=None, last_change: float | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.last_change = last_change


class ZeroLimit(SolverError):
    pass


class DanglingNode(DataError):
    def __init__(self, message: str, countries: tuple[str, ...] = ()):
        super().__init__(message)
        self.countries = countries


class ReducibleNetwork(DataError):
    def __init__(self, message: str, components: tuple[tuple[str, ...], ...] = ()):
        super().__init__(message)
        self.components = components


# stats
class LengthMismatch(DataError):
    pass


class TooFewSamples(DataError):
    pass


class ZeroVariance(DataError):
    pass


class DomainError(DataError):
    pass


class MissingGroup(DataError):
    pass


class EmptyInput(DataError):
    pass


# pipeline
class MissingYearValue(DataError):
    pass


class NonPositiveGDP(DataError):
    pass


class MissingValue(DataError):
    pass


# io
class MalformedRow(DataError):
    pass


class LabelMismatch(DataError):
    pass


class DuplicateYear(DataError):
    pass


class NonPositiveValue(DataError):
    pass


class InvalidGroup(DataError):
    pass


class DuplicateCountry(DataError):
    pass


class IoFailure(TradenetError, OSError):
    pass


class UsageError(TradenetError):
    exit_status = 1
