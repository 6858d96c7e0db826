"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class HHMeansError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HHMeansError, ValueError):
    """An argument lies outside the domain of the requested quantity.

    ``node`` and ``x`` are filled in by the expression evaluator so that the
    offending sub-expression and abscissa can be reported.
    """

    def __init__(self, message: str, *, node=None, x=None):
        super().__init__(message)
        self.node = node
        self.x = x


class OutOfDomain(DomainError):
    """A weight sits at an endpoint where the quantity is undefined."""


class DiagonalArgument(DomainError):
    """The pair (a, b) is on (or numerically at) the diagonal a = b."""


class NegativeFunction(DomainError):
    """A function required to be nonnegative produced a negative value."""


class QuadratureFailure(HHMeansError, ArithmeticError):
    """Adaptive quadrature did not reach its tolerance within max_depth."""


class FnSyntaxError(HHMeansError, ValueError):
    """Malformed function expression.

    ``position`` is a 0-based character offset into the source text and
    ``expected`` a tuple of human-readable token descriptions.
    """

    def __init__(self, message: str, position: int, expected=()):
        self.position = position
        self.expected = tuple(expected)
        detail = f"{message} at position {position}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownFunction(FnSyntaxError):
    """A call to a function name outside the supported set."""

    def __init__(self, name: str, position: int, known=()):
        self.name = name
        super().__init__(f"unknown function {name!r}", position, known)


class ConfigError(HHMeansError, ValueError):
    """Invalid run configuration (ranges, sample counts, function text)."""
