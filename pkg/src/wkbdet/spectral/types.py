"""Value types shared by the spectral routines."""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DomainError


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1

    @property
    def offset(self) -> int:
        # global level index n = 2k + offset
        return 0 if self is Parity.EVEN else 1

    @classmethod
    def coerce(cls, p) -> "Parity":
        if isinstance(p, Parity):
            return p
        if p in ("+", 1, "plus"):
            return cls.EVEN
        if p in ("-", -1, "minus"):
            return cls.ODD
        try:
            return cls(p)
        except ValueError:
            raise DomainError(f"unknown parity {p!r}") from None


class DetMethod(str, enum.Enum):
    ZETA = "zeta-integrated"
    HADAMARD = "hadamard-product"
    RECESSIVE = "recessive-solution"
    HARMONIC = "harmonic-closed-form"


@dataclass(frozen=True)
class DeterminantValue:
    value: complex
    log_value: complex
    parity: Parity
    method: DetMethod
    error_estimate: float
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be non-negative")

    @classmethod
    def from_log(cls, log_value, parity, method, error_estimate, **details) -> "DeterminantValue":
        log_value = complex(log_value)
        return cls(cmath.exp(log_value), log_value, Parity.coerce(parity), method,
                   float(error_estimate), details)


@dataclass(frozen=True)
class RecessiveSolution:
    """Values at q = 0 of the solution decaying at q = +inf.

    psi0 and dpsi0 are exp(log_psi0) and exp(log_dpsi0); the logs carry a
    continuous phase so that large or rotated evaluations stay usable.
    ``dpsi0`` is psi'(0) itself, so log_dpsi0 is log(-psi'(0)) + i pi.
    """
    psi0: complex
    dpsi0: complex
    R: float
    wkb_order: int
    jost_factor: Any
    log_psi0: complex = 0j
    log_minus_dpsi0: complex = 0j
    error_estimate: float = 0.0
    nodes: int = 0
    details: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class WeylModel:
    """Tail model n + 1/2 = S(E)/pi + sum_j c_j (S(E)/pi)^(-e_j)."""
    exponent: float          # growth exponent 2N/(N+2) of lam_n in n
    amplitude: float         # lam_n ~ amplitude * (n + 1/2)^exponent
    coeffs: tuple = ()
    powers: tuple = ()
    max_rel_error: float = 0.0


@dataclass(frozen=True)
class ParitySpectrum:
    parity: Parity
    eigenvalues: np.ndarray
    weyl: WeylModel
    count: int
    tol: float = 1e-10
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        if ev.size != self.count:
            raise ValueError("count does not match the number of eigenvalues")
        if ev.size > 1 and not np.all(np.diff(ev) > 0):
            raise ValueError("eigenvalues must be strictly increasing")
