"""Exception hierarchy shared by every module.

Errors raised because the numerics left their trusted regime derive from
``NumericalGuard``; the command line maps those to exit code 2 and
configuration problems to exit code 1.
"""
from __future__ import annotations


class InlsError(Exception):
    """Base class for all package errors."""


# exponent engine
class Infeasible(InlsError):
    """No witness (epsilon, tau) satisfies an exponent construction."""


class QOutOfRange(InlsError):
    """Lebesgue exponent outside the range allowed for the dimension."""


# grids and fields
class BadSize(InlsError):
    """Grid point count is not a power of two or is too small."""


class BadExponent(InlsError):
    """Singularity power makes the origin cell average diverge."""


class TailTooFat(InlsError):
    """Initial Gaussian has not decayed at the box edge."""


class FieldFormatError(InlsError):
    """Binary field file is truncated or has an inconsistent header."""


# numerical guards raised during time stepping
class NumericalGuard(InlsError):
    """A run left the regime where the discretisation is trusted."""


class Overflow(NumericalGuard):
    """Field amplitude became non-finite or exceeded the blow-up limit."""


class BoundaryContamination(NumericalGuard):
    """Too much mass reached the outer band of the periodic box."""


class SpectralTail(NumericalGuard):
    """Too much spectral power sits in the top octave of resolved modes."""


# observables and diagnostics
class NonUniform(InlsError):
    """Samples are not equally spaced in time."""


class ZeroTime(InlsError):
    """Operation undefined at t = 0."""


class WindowTooShort(InlsError):
    """Fit window holds too few samples."""


class WrongRegime(InlsError):
    """Diagnostic requested outside the parameter regime it describes."""


class NotAdmissible(InlsError):
    """Exponent pair fails the Schroedinger admissibility relation."""


class HorizonExceeded(InlsError):
    """Checkpoint lies outside the simulated time horizon."""


# configuration and persistence
class ParseError(InlsError):
    """Configuration document could not be parsed."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ValidationError(InlsError):
    """Configuration parsed but violates an invariant."""

    def __init__(self, message: str, invariant: str | None = None):
        self.invariant = invariant
        super().__init__(message)


class SchemaError(InlsError):
    """Run directory content does not match the expected layout."""
