"""Regularised actions, spectral determinants and Stokes geometry for
-d^2/dq^2 + u q^N + v q^M + lam with even N > M."""
from .actions import TrinomialMomentum, RegularizedAction, ActionMethod
from .errors import CalibrationError, DomainError, NumericalError, SectorError, WkbdetError

__version__ = "0.1.0"

__all__ = [
    "TrinomialMomentum", "RegularizedAction", "ActionMethod", "WkbdetError", "DomainError",
    "SectorError", "NumericalError", "CalibrationError", "__version__",
]
