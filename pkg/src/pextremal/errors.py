"""Exception types raised across the package."""


class PExtremalError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(PExtremalError, ValueError):
    pass


class UnsupportedBodyError(PExtremalError, ValueError):
    """Operation not available for this kind of convex body."""


class ConeConditionError(PExtremalError, ValueError):
    """No k <= cap with Sigma contained in kP."""


class NotDifferentiableError(PExtremalError, ValueError):
    """Point lies on the non-smooth locus of a Green function."""


class UntrustedDerivativeError(PExtremalError, ValueError):
    """Finite differences requested outside a field's smooth region."""


class NotSmoothBodyError(PExtremalError, ValueError):
    """Support function of the body is not smooth away from the origin."""


class PreconditionViolatedError(PExtremalError, ValueError):
    pass


class GridTooCoarseError(PExtremalError, ValueError):
    """Grid step exceeds half the mollification width."""


class NumericalError(PExtremalError, ArithmeticError):
    """Non-finite value produced by a named operation."""

    def __init__(self, operation, detail=""):
        self.operation = operation
        super().__init__(f"{operation}: {detail}" if detail else operation)
