"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`ParameterError` is a usage error
(1), :class:`DataError` a data/domain error (2) and :class:`NumericalError` a
numerical failure (3).
"""


class NetsplitError(Exception):
    """Base class for all package errors."""


class ParameterError(NetsplitError, ValueError):
    """A tuning parameter is outside its admissible range."""


class DataError(NetsplitError, ValueError):
    """Input data violate the edge domain or file format."""


class ParseError(DataError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


class NumericalError(NetsplitError, ArithmeticError):
    """A computation is undefined for the data at hand."""


class EmptyCellError(NumericalError):
    """A community pair (optionally restricted by train value) has no dyads."""

    def __init__(self, k: int, l: int, s: int | None = None):
        self.cell = (k, l)
        self.s = s
        where = f"cell ({k + 1},{l + 1})"
        if s is not None:
            where += f" with train value {s}"
        super().__init__(f"empty dyad set for {where}")


class DegenerateClusteringError(NumericalError):
    """k-means left a community empty; a smaller K is needed."""
