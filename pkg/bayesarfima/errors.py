"""
Exceptions raised by bayesarfima. Argument errors stay plain ``ValueError``;
the classes below mark the failures the command line maps to exit codes.
"""


class ArfimaError(Exception):
    """
    Base class of every error specific to this package.
    """
    exit_code = 1


class DomainError(ArfimaError, ValueError):
    """
    Process parameters outside their admissible region (|d| >= 1/2,
    non-stationary AR part, non-invertible MA part, zero frequency with d > 0).
    """
    exit_code = 3


class NumericalError(ArfimaError, ArithmeticError):
    """
    A computation broke down numerically: non-positive prediction variance,
    rejection sampler cap reached, degenerate conditional.
    """
    exit_code = 4


class ConfigError(ArfimaError, ValueError):
    """
    Invalid or unknown configuration values, including proposal covariances
    that are not positive definite.
    """
    exit_code = 2


class DataError(ArfimaError, ValueError):
    """
    Unreadable, empty, non-finite or degenerate input series.
    """
    exit_code = 3


class UnsupportedOperationError(ArfimaError, NotImplementedError):
    """
    The requested kernel or likelihood does not exist for this model, e.g.
    Gibbs updates with Student-t innovations.
    """
    exit_code = 4
