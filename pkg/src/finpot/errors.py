"""Exception hierarchy.

Two families: :class:`ValidationError` for bad inputs and violated
preconditions (CLI exit code 1) and :class:`SolverError` for numerical
failures (CLI exit code 2).
"""


class FinpotError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FinpotError, ValueError):
    """Input data or a precondition is invalid."""


class SymmetryViolation(ValidationError):
    pass


class NonpositiveDiagonal(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class NonfiniteEntry(ValidationError):
    pass


class DuplicatePoints(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class NotPositiveSemidefinite(ValidationError):
    pass


class NotStrictlyPositiveDefinite(NotPositiveSemidefinite):
    pass


class TooLarge(ValidationError):
    pass


class EmptyFamily(ValidationError):
    pass


class PreconditionViolated(ValidationError):
    pass


class ParseError(ValidationError):
    """A CSV or JSON input could not be parsed."""


class SolverError(FinpotError, RuntimeError):
    """A solver did not produce a usable result."""


class MaxIterations(SolverError):
    pass


class Infeasible(SolverError):
    pass


class LpFailure(SolverError):
    pass
