"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so keep the hierarchy flat and stable.
"""


class WkbdetError(Exception):
    """Base class for all package errors."""


class DomainError(WkbdetError, ValueError):
    """Input outside the domain of an operation (poles, bad parity, signs)."""


class SectorError(DomainError):
    """Complex coupling outside the admissible sector |arg v| < Theta."""


class NumericalError(WkbdetError, ArithmeticError):
    """A numerical procedure failed to meet its tolerance or to converge."""


class CalibrationError(NumericalError):
    """Re-derived normalisation constants drifted from the frozen values."""
