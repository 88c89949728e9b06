"""Exception types raised across the package."""

import numpy as np


class OrderedL2Error(Exception):
    """Base class for errors raised by orderedl2."""


class DimensionMismatch(OrderedL2Error, ValueError):
    """Operand shapes are inconsistent."""


class NotPositiveDefinite(OrderedL2Error, np.linalg.LinAlgError):
    """A Cholesky pivot was not strictly positive."""


class OutOfDomain(OrderedL2Error, ValueError):
    """An argument lies outside the domain of a function."""


class DegenerateDenominator(OrderedL2Error, ValueError):
    """The correction denominator of a lambda sequence is not positive."""


class NonMonotone(OrderedL2Error, ValueError):
    """A regularization sequence increases somewhere.

    ``index`` is the 0-based position of the first increase, i.e. the
    sequence satisfies ``values[index + 1] > values[index]``.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class TooLarge(OrderedL2Error, ValueError):
    """An exhaustive oracle was asked for a problem it cannot enumerate."""


class NonFiniteError(OrderedL2Error, FloatingPointError):
    """An ADMM iterate left the finite range."""


class ParseError(OrderedL2Error, ValueError):
    """Malformed input line in a data file."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class LibsvmIndexError(ParseError, IndexError):
    """Feature index is zero, negative or not strictly ascending."""


class UnknownLabel(OrderedL2Error, ValueError):
    """A label does not belong to either of the two expected classes."""


class ConvergenceWarning(UserWarning):
    """ADMM stopped at ``max_iter`` without meeting the stopping rule."""
