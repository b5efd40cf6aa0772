"""Exception types shared across the package."""


class RobustHDError(Exception):
    """Base class for all package errors."""


class ArgumentError(RobustHDError, ValueError):
    """A parameter lies outside its documented domain."""


class PreconditionError(RobustHDError, ValueError):
    """An operation was called on inputs that violate its precondition,
    e.g. an epsilon schedule flagged invalid or an empty trim window."""


class DegenerateScaleError(RobustHDError, ArithmeticError):
    """A scale estimate is zero, so the requested quotient is undefined."""


class NumericError(RobustHDError, ArithmeticError):
    """A numerical routine failed, e.g. factorization of a non-PSD matrix."""
