"""Complex Gamma function and complete elliptic integrals K, E.

K and E are evaluated by the arithmetic-geometric mean.  The real-modulus
routines are written against plain arithmetic so they also run on
``mpmath.mpf`` inputs, which the tests use to resolve remainders far below
double precision.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any

import mpmath

from .errors import DomainError

__all__ = [
    "Modulus",
    "gamma",
    "log_gamma",
    "rgamma",
    "ellip_K",
    "ellip_E",
    "ellip_KE",
    "dK_dk",
    "K_E_near_unit_modulus",
    "landen_transform",
    "inverse_landen_transform",
    "imaginary_modulus_transform",
]

# Lanczos-type coefficients, g = 671/128 (Numerical Recipes, 3rd ed.)
_LANCZOS_G = 671.0 / 128.0
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COF = (
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
)
_SQRT_2PI = 2.5066282746310005


def _is_mp(x: Any) -> bool:
    return isinstance(x, (mpmath.mpf, mpmath.mpc))


def _sqrt(x):
    return mpmath.sqrt(x) if _is_mp(x) else math.sqrt(x)


def _log(x):
    return mpmath.log(x) if _is_mp(x) else math.log(x)


def _pi(like):
    return +mpmath.pi if _is_mp(like) else math.pi


def _eps(like):
    return mpmath.eps if _is_mp(like) else 2.0**-53


def _check_not_pole(z: complex) -> None:
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise DomainError(f"Gamma has a pole at z = {z.real:g}")


def _sin_pi(z: complex) -> complex:
    # sin(pi z) with the integer part removed first, so that zeros stay exact
    n = round(z.real)
    w = z - n
    s = cmath.sin(math.pi * w)
    return -s if n % 2 else s


def _log_gamma_right(z: complex) -> complex:
    """log Gamma(z) for Re z >= 1/2 (principal determination of the sum)."""
    y = z
    ser = _LANCZOS_C0
    for c in _LANCZOS_COF:
        y = y + 1.0
        ser = ser + c / y
    tmp = z + _LANCZOS_G
    return (z + 0.5) * cmath.log(tmp) - tmp + cmath.log(_SQRT_2PI * ser / z)


def log_gamma(z: complex) -> complex:
    """A logarithm of Gamma(z); equals ``math.lgamma`` on the positive axis.

    The imaginary part is *a* determination, not necessarily the principal
    branch of log Gamma; only ``exp(log_gamma(z))`` is guaranteed.
    """
    z = complex(z)
    _check_not_pole(z)
    if z.real >= 0.5:
        return _log_gamma_right(z)
    return cmath.log(math.pi / _sin_pi(z)) - _log_gamma_right(1.0 - z)


def gamma(z: complex) -> complex:
    """Gamma function for complex argument (reflection + Lanczos)."""
    z = complex(z)
    _check_not_pole(z)
    if z.real >= 0.5:
        return cmath.exp(_log_gamma_right(z))
    return math.pi / (_sin_pi(z) * cmath.exp(_log_gamma_right(1.0 - z)))


def rgamma(z: complex) -> complex:
    """1/Gamma(z), entire; exactly zero at the poles of Gamma."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        return 0j
    if z.real >= 0.5:
        return cmath.exp(-_log_gamma_right(z))
    return _sin_pi(z) * cmath.exp(_log_gamma_right(1.0 - z)) / math.pi


@dataclass(frozen=True)
class Modulus:
    """Elliptic modulus k together with its complement k' (k^2 + k'^2 = 1).

    Only real k in [0, 1] and purely imaginary k are representable.  Build
    instances with :meth:`from_k`, :meth:`from_kprime` or :meth:`imaginary`;
    near k = 1 prefer :meth:`from_kprime`, which keeps k' to full relative
    precision.
    """

    k: Any
    kprime: Any
    ktilde: Any = None  # set only for k = i*ktilde/ktilde'

    @property
    def is_imaginary(self) -> bool:
        return self.ktilde is not None

    @classmethod
    def from_k(cls, k) -> "Modulus":
        if isinstance(k, complex) or (isinstance(k, mpmath.mpc)):
            raise DomainError("complex modulus: use Modulus.imaginary")
        if not 0 <= k <= 1:
            raise DomainError(f"real modulus must lie in [0, 1], got {k}")
        kp = _sqrt((1 - k) * (1 + k))
        return cls(k, kp)

    @classmethod
    def from_kprime(cls, kprime) -> "Modulus":
        if isinstance(kprime, complex) or not 0 < kprime <= 1:
            raise DomainError(f"complementary modulus must lie in (0, 1], got {kprime}")
        k = _sqrt((1 - kprime) * (1 + kprime))
        return cls(k, kprime)

    @classmethod
    def imaginary(cls, ktilde) -> "Modulus":
        """k = i*ktilde/ktilde' with real ktilde in [0, 1)."""
        if isinstance(ktilde, complex) or not 0 <= ktilde < 1:
            raise DomainError(f"ktilde must lie in [0, 1), got {ktilde}")
        ktp = _sqrt((1 - ktilde) * (1 + ktilde))
        return cls(1j * ktilde / ktp, 1 / ktp, ktilde)

    def residual(self) -> float:
        """|k^2 + k'^2 - 1|, the defining invariant."""
        return abs(self.k * self.k + self.kprime * self.kprime - 1)


def _as_modulus(m) -> Modulus:
    return m if isinstance(m, Modulus) else Modulus.from_k(m)


def _agm_KE(k, kprime):
    """(K, E) for real 0 <= k < 1 from the AGM of (1, k')."""
    a, b, c = 1 + 0 * kprime, kprime, k
    tol = 4 * _eps(kprime)
    acc = c * c / 2
    p = 1 + 0 * kprime
    for _ in range(200):
        if abs(a - b) <= tol * a:
            break
        c = (a - b) / 2
        a, b = (a + b) / 2, _sqrt(a * b)
        acc += p * c * c
        p *= 2
    K = _pi(kprime) / (2 * a)
    return K, K * (1 - acc)


def ellip_KE(m) -> tuple:
    """Both complete integrals for a modulus (see :func:`ellip_K`)."""
    m = _as_modulus(m)
    if m.is_imaginary:
        return imaginary_modulus_transform(m.ktilde)
    if m.kprime == 0:
        raise DomainError("K(k) diverges at k = 1")
    return _agm_KE(m.k, m.kprime)


def ellip_K(m):
    """Complete elliptic integral of the first kind K(k), k in [0, 1)."""
    return ellip_KE(m)[0]


def ellip_E(m):
    """Complete elliptic integral of the second kind E(k), k in [0, 1]."""
    m = _as_modulus(m)
    if not m.is_imaginary and m.kprime == 0:
        return 1 + 0 * m.k
    return ellip_KE(m)[1]


def dK_dk(m):
    """dK/dk = E/(k k'^2) - K/k for real k in (0, 1)."""
    m = _as_modulus(m)
    if m.is_imaginary or not 0 < m.k < 1:
        raise DomainError("dK/dk requires real k in (0, 1)")
    K, E = ellip_KE(m)
    return E / (m.k * m.kprime**2) - K / m.k


def _near_one_coeffs(n_max):
    """Coefficients (a_n, b_n, c_n, d_n) of the k' -> 0 series of K and E.

    K = sum a_n k'^(2n) (L - b_n),  E = 1 + sum_{n>=1} c_n k'^(2n) (L - d_n),
    with L = log(4/k').
    """
    from fractions import Fraction as F

    out = []
    half_n = F(1)  # (1/2)_n / n!
    half_prev = F(1)
    harmonic_pairs = F(0)
    for n in range(n_max + 1):
        if n > 0:
            half_prev = half_n
            half_n = half_n * F(2 * n - 1, 2 * n)
        a_n = half_n * half_n
        b_n = 2 * harmonic_pairs if n == 0 else 2 * (harmonic_pairs + F(1, (2 * n - 1) * 2 * n))
        if n > 0:
            c_n = half_n * half_prev
            d_n = 2 * harmonic_pairs + F(1, (2 * n - 1) * 2 * n)
            harmonic_pairs += F(1, (2 * n - 1) * 2 * n)
        else:
            c_n = d_n = F(0)
        out.append((a_n, b_n, c_n, d_n))
    return out


MAX_NEAR_ONE_ORDER = 12


def K_E_near_unit_modulus(kprime, order=None):
    """Truncated k' -> 0 expansions of (K, E).

    ``order=None`` keeps the printed truncation: K through k'^2 and E through
    k'^4, leaving remainders O(k'^4 log k') and O(k'^6 log k').  An integer
    ``order`` keeps both series through k'^(2*order).
    """
    if isinstance(kprime, complex) or not 0 < kprime <= 0.3:
        raise DomainError("near-unit expansion requires 0 < k' <= 0.3")
    k_order, e_order = (1, 2) if order is None else (order, order)
    if max(k_order, e_order) > MAX_NEAR_ONE_ORDER:
        raise DomainError(f"order > {MAX_NEAR_ONE_ORDER} not tabulated")
    coeffs = _near_one_coeffs(max(k_order, e_order))
    L = _log(4 / kprime)
    kp2 = kprime * kprime
    K = 0 * kprime
    E = 1 + 0 * kprime
    power = 1 + 0 * kprime
    for n, (a, b, c, d) in enumerate(coeffs):
        if n <= k_order:
            K += _frac(a, kprime) * power * (L - _frac(b, kprime))
        if 0 < n <= e_order:
            E += _frac(c, kprime) * power * (L - _frac(d, kprime))
        power *= kp2
    return K, E


def _frac(q, like):
    if _is_mp(like):
        return mpmath.mpf(q.numerator) / q.denominator
    return q.numerator / q.denominator


def landen_transform(m: Modulus | None = None, *, kdot_prime=None):
    """(K(k), E(k)) through descending Landen: k = (1 - kd')/(1 + kd').

    Either the modulus ``m`` (real k in [0, 1)) or the transformed
    complementary modulus ``kdot_prime`` in (0, 1] must be given.
    """
    if (m is None) == (kdot_prime is None):
        raise DomainError("give exactly one of m or kdot_prime")
    if m is not None:
        m = _as_modulus(m)
        if m.is_imaginary or m.k >= 1:
            raise DomainError("Landen transform needs real k in [0, 1)")
        kdot_prime = (1 - m.k) / (1 + m.k)
    elif not 0 < kdot_prime <= 1:
        raise DomainError("kdot' must lie in (0, 1]")
    Kd, Ed = ellip_KE(Modulus.from_kprime(kdot_prime))
    K = (1 + kdot_prime) / 2 * Kd
    E = (Ed + kdot_prime * Kd) / (1 + kdot_prime)
    return K, E


def inverse_landen_transform(m):
    """Undo :func:`landen_transform`: from (K(k), E(k)) recover K, E at
    the modulus kd with kd' = (1 - k)/(1 + k)."""
    m = _as_modulus(m)
    if m.is_imaginary or m.k >= 1:
        raise DomainError("Landen transform needs real k in [0, 1)")
    K, E = ellip_KE(m)
    kdp = (1 - m.k) / (1 + m.k)
    Kd = 2 * K / (1 + kdp)
    Ed = (1 + kdp) * E - kdp * Kd
    return Kd, Ed


def imaginary_modulus_transform(ktilde):
    """(K(k), E(k)) at the pure-imaginary modulus k = i*ktilde/ktilde'."""
    if isinstance(ktilde, complex) or not 0 <= ktilde < 1:
        raise DomainError(f"ktilde must lie in [0, 1), got {ktilde}")
    mt = Modulus.from_k(ktilde)
    Kt, Et = _agm_KE(mt.k, mt.kprime)
    return mt.kprime * Kt, Et / mt.kprime
