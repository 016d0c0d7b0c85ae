"""Closed forms for the harmonic determinants of -d^2/dq^2 + q^2 + Lam.

D+(Lam) = 2^(1 - Lam/2) sqrt(pi) / Gamma((1 + Lam)/4)
D-(Lam) = 2^(-Lam/2)    sqrt(pi) / Gamma((3 + Lam)/4)

They vanish at Lam = -(4k+1) and -(4k+3) respectively.
"""
from __future__ import annotations

import cmath
import math

from ..specfun import log_gamma, rgamma
from .types import DeterminantValue, DetMethod, Parity

_LOG2 = math.log(2.0)
_HALF_LOG_PI = 0.5 * math.log(math.pi)


def _shift(parity: Parity) -> tuple[float, float]:
    # (power-of-two offset, Gamma argument offset)
    return (1.0, 1.0) if parity is Parity.EVEN else (0.0, 3.0)


def harmonic_det(parity, Lam) -> complex:
    """D2+/- (Lam); entire in Lam, exact zeros at the spectrum."""
    parity = Parity.coerce(parity)
    a, b = _shift(parity)
    Lam = complex(Lam)
    return cmath.exp((a - Lam / 2) * _LOG2 + _HALF_LOG_PI) * rgamma((b + Lam) / 4)


def harmonic_log_det(parity, Lam) -> complex:
    """A logarithm of D2+/- (Lam); real on Lam > -1 (even) or > -3 (odd)."""
    parity = Parity.coerce(parity)
    a, b = _shift(parity)
    Lam = complex(Lam)
    return (a - Lam / 2) * _LOG2 + _HALF_LOG_PI - log_gamma((b + Lam) / 4)


def harmonic_value(parity, Lam) -> DeterminantValue:
    parity = Parity.coerce(parity)
    lv = harmonic_log_det(parity, Lam)
    return DeterminantValue.from_log(lv, parity, DetMethod.HARMONIC, 1e-15 * (1 + abs(lv)))


def harmonic_levels(parity, count: int, u: float = 1.0) -> list[float]:
    """Eigenvalues of -d^2 + u q^2 in one parity sector: sqrt(u) (4k+1) or (4k+3)."""
    parity = Parity.coerce(parity)
    off = 1 if parity is Parity.EVEN else 3
    return [math.sqrt(u) * (4 * k + off) for k in range(count)]
