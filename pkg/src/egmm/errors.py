"""Exception hierarchy shared by every module."""


class EgmmError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParameterError(EgmmError, ValueError):
    """An argument is out of range or inconsistent with the others."""

    exit_code = 2


class DataError(EgmmError, ValueError):
    """The input data cannot support the requested computation."""

    exit_code = 3


class NumericError(EgmmError, ArithmeticError):
    """A matrix could not be factorized or a quantity became non-finite."""

    exit_code = 4


class ConflictError(NumericError):
    """Two mass functions are in total conflict (Dempster's rule undefined)."""
