"""Exception hierarchy.

Two roots matter to callers: :class:`InputError` for anything wrong with the
member or the arguments (bad shape, invalid chf, out-of-domain tilt, bad data
file), and :class:`NumericalError` for computations that ran but could not
reach their accuracy target.  The CLI maps them to exit codes 2 and 1.
"""


class GenstabError(Exception):
    """Base class for all package errors."""


class InputError(GenstabError, ValueError):
    """Invalid parameters, member or user input."""


class NumericalError(GenstabError, ArithmeticError):
    """A numerical procedure failed to meet its accuracy or efficiency target."""


class IllDefinedShapeError(InputError):
    """Shape exponent gamma == 0 (the family degenerates)."""


class InvalidMemberError(InputError):
    """Parameters do not define a proper characteristic function."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularTiltError(InputError):
    """Tilt parameter at or beyond the singular point theta = 1/c."""


class DomainError(InputError):
    """Argument outside the analyticity strip / mgf domain."""


class StripViolationError(DomainError):
    """Complex argument with Re(1 - i z c) <= 0."""


class UndefinedPowerError(InputError):
    """Tweedie power requested for gamma == 1."""


class DegenerateMemberError(InputError):
    """Member is a point mass (or numerically so) and has no density."""


class RegimeError(InputError):
    """Operation is only defined for a different regime."""


class PreconditionError(InputError):
    """A documented precondition of the operation does not hold."""


class ParseError(InputError):
    """Data file contains a row that is not a finite number."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class InsufficientDataError(InputError):
    """Fewer observations than the operation needs."""


class SupportError(InputError):
    """Data fall outside the support of the candidate member."""


class FallbackToGridError(InputError):
    """Moment ratio too close to 1; use a profile grid over gamma instead."""


class AccuracyError(NumericalError):
    """Quadrature did not converge; ``bound`` is the achieved error estimate."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class EfficiencyError(NumericalError):
    """Rejection sampler acceptance rate too small to be practical."""


class SymmetryError(NumericalError):
    """Function values fail Hermitian symmetry phi(-t) = conj(phi(t))."""


class ConvergenceError(NumericalError):
    """Optimizer failed to converge."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []
