"""Determinants from the recessive solution.

The solution decaying at q = +inf is normalised by its WKB form
Pi^(-1/2) exp(I(lam, v) - int_0^q Pi) with the canonical action, so the
determinants come out directly: D- = psi(0) and D+ = -psi'(0).  The
normalisation constants were fixed against the harmonic closed forms and
are frozen in KAPPA; :func:`recalibrate` re-derives them.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate

from ..actions import TrinomialMomentum, action_binomial, action_quartic
from ..errors import CalibrationError, DomainError, NumericalError, SectorError
from . import _kernels
from .types import DeterminantValue, DetMethod, Parity, RecessiveSolution

# D- = KAPPA[-] psi(0), D+ = KAPPA[+] (-psi'(0)); calibrated on V = q^2.
KAPPA = {Parity.EVEN: 1.0, Parity.ODD: 1.0}
SECTOR_SLACK = 1e-12
KMAX = 400


def sector_theta(N: int, M: int) -> float:
    return (M + 2) * math.pi / (N + 2)


def _coerce(m: TrinomialMomentum):
    u = float(m.u.real if isinstance(m.u, complex) else m.u)
    if isinstance(m.u, complex) and m.u.imag != 0 or u <= 0:
        raise DomainError("leading coefficient must be real and positive")
    return m.N, m.M, u, complex(m.v), complex(m.lam)


def check_sector(m: TrinomialMomentum, probe_beyond: bool = False) -> None:
    """Raise SectorError unless |arg v| <= Theta(N, M).

    The boundary itself is admitted (see the notes on the conjugate point
    of a real coupling, which sits exactly at arg v = Theta for (4, 2)).
    """
    v = complex(m.v)
    if v == 0 or m.M == 0 or probe_beyond:
        return
    theta = sector_theta(m.N, m.M)
    if abs(cmath.phase(v)) > theta + SECTOR_SLACK:
        raise SectorError(
            f"|arg v| = {abs(cmath.phase(v)):.6f} exceeds the sector angle {theta:.6f}"
        )


@lru_cache(maxsize=64)
def _kappa_residue(N: int, M: int, u: float) -> float:
    """k with I_canonical - FP(int_0^inf Pi) = k * beta_{-1}.

    FP is the Hadamard finite part.  The two differ only when the residue
    beta_{-1} is non-zero, i.e. when j = (N+2)/(2(N-M)) is an integer.
    The constant is evaluated once at unit coupling.
    """
    if Fraction(N + 2, 2 * (N - M)).denominator != 1:
        return 0.0
    # unit coupling on the constant term for N = 2, on q^M otherwise
    X = max(4.0, (1e3 / u) ** (1.0 / (N - M)))
    T, _, _, _, _ = _kernels.start_data(N, M, u, 1.0 + 0j, 0j, X, KMAX)
    f = lambda q: math.sqrt(u * q**N + q**M)
    knots = np.geomspace(1e-3, X, 12)
    area, _ = integrate.quad(f, 0.0, knots[0], epsabs=0, epsrel=1e-13)
    for a, b in zip(knots[:-1], knots[1:]):
        area += integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
    fp = area + T.real
    canon = action_binomial(u, 1.0, N, M)
    return (canon.value - fp) / canon.residue


def _residue_now(N, M, u, v, lam) -> complex:
    p2 = np.zeros(N + 1, dtype=complex)
    p2[0] = u
    p2[N - M] += v
    p2[N] += lam
    return complex(_kernels.sqrt_series(p2, N // 2 + 1)[N // 2 + 1])


def default_radius(N, M, u, v, lam, ratio: float = 0.25) -> float:
    """Smallest R where the large-q series converge briskly and WKB is sharp."""
    R = (60.0 / math.sqrt(u)) ** (1.0 / (N // 2 + 1))
    if abs(v) > 0:
        R = max(R, (abs(v) / (ratio * u)) ** (1.0 / (N - M)))
    if abs(lam) > 0:
        R = max(R, (abs(lam) / (ratio * u)) ** (1.0 / N))
    return max(R, 1.0)


def start_point(N, M, u, v, lam, R=None, tol=1e-15):
    """(R, log psi(R), psi'(R)/psi(R), truncation error) for the recessive solution."""
    R = default_radius(N, M, u, v, lam) if R is None else float(R)
    for _ in range(12):
        T, half_log_pi, omega, y, err = _kernels.start_data(N, M, u, v, lam, R, KMAX)
        if err < tol:
            break
        R *= 1.25
    else:
        raise NumericalError("asymptotic start data did not reach tolerance")
    C = _kappa_residue(N, M, u) * _residue_now(N, M, u, v, lam)
    return R, complex(C + T - half_log_pi + omega), complex(y), float(err)


def _one_sweep(N, M, u, v, lam, R, h0, y):
    ls, yy, pp, ph_y, ph_p, nodes, steps = _kernels.sweep(N, M, u, v, lam, R, h0, 1.0 + 0j, y)
    if yy == 0 or pp == 0:
        raise NumericalError("solution vanished exactly at the origin")
    log_y = complex(ls + math.log(abs(yy)), ph_y)
    log_mp = complex(ls + math.log(abs(pp)), cmath.phase(-y) + ph_p)
    return log_y, log_mp, nodes, steps


def _classical_log(m: TrinomialMomentum):
    """log e^I Pi(0)^(-1/2) when the action is cheaply available, else None."""
    if m.N == 4 and m.M == 2 and m.is_real_positive and float(m.u) == 1.0 and m.lam != 0:
        I = action_quartic(float(m.v.real if isinstance(m.v, complex) else m.v),
                           float(m.lam.real if isinstance(m.lam, complex) else m.lam)).value
        return I - 0.25 * cmath.log(complex(m.lam))
    return None


def recessive_solution(m: TrinomialMomentum, *, R=None, h0: float = 0.01,
                       check_radius: bool = False) -> RecessiveSolution:
    """Integrate the recessive solution inward from R to 0.

    Two sweeps at h0 and h0/2 are combined by Richardson extrapolation
    (RK4, so the error ratio is 16).  With ``check_radius`` a third sweep
    from 2R measures the truncation of the asymptotic start data.
    """
    N, M, u, v, lam = _coerce(m)
    R, log_psiR, y, trunc = start_point(N, M, u, v, lam, R)
    a1, b1, nodes, steps = _one_sweep(N, M, u, v, lam, R, h0, y)
    a2, b2, _, steps2 = _one_sweep(N, M, u, v, lam, R, h0 / 2, y)
    log_psi = log_psiR + a2 + (a2 - a1) / 15.0
    log_mdpsi = log_psiR + b2 + (b2 - b1) / 15.0
    err = max(abs(a2 - a1), abs(b2 - b1)) / 15.0 + trunc + 1e-14 * (1 + abs(log_psiR))
    details = {"steps": steps + steps2, "richardson": (abs(a2 - a1) / 15.0, abs(b2 - b1) / 15.0)}
    if check_radius:
        R2, log_psiR2, y2, _ = start_point(N, M, u, v, lam, 2 * R)
        c1, d1, _, _ = _one_sweep(N, M, u, v, lam, R2, h0, y2)
        c2, d2, _, _ = _one_sweep(N, M, u, v, lam, R2, h0 / 2, y2)
        alt = log_psiR2 + c2 + (c2 - c1) / 15.0
        alt_d = log_psiR2 + d2 + (d2 - d1) / 15.0
        drift = max(abs(alt - log_psi), abs(alt_d - log_mdpsi))
        details["radius_drift"] = drift
        err = max(err, drift)
    cl = _classical_log(m)
    jost = cmath.exp(log_psi - cl) if cl is not None else None
    psi0 = cmath.exp(log_psi)
    dpsi0 = -cmath.exp(log_mdpsi)
    return RecessiveSolution(psi0, dpsi0, R, KMAX, jost, log_psi, log_mdpsi, err, nodes, details)


def det_complex(m: TrinomialMomentum, parity, *, R=None, tol: float = 1e-9,
                h0: float | None = None, probe_beyond: bool = False) -> DeterminantValue:
    """D+ or D- at complex (lam, v) from the recessive solution.

    The coupling must lie in the closed sector |arg v| <= Theta; ``h0`` is
    halved until the Richardson estimate meets ``tol``.
    """
    parity = Parity.coerce(parity)
    check_sector(m, probe_beyond)
    h = 0.01 if h0 is None else h0
    for _ in range(6):
        sol = recessive_solution(m, R=R, h0=h)
        if sol.error_estimate <= tol:
            break
        h /= 2
    else:
        raise NumericalError(f"recessive determinant error {sol.error_estimate:.2e} > tol {tol:.1e}")
    if parity is Parity.ODD:
        log_value = sol.log_psi0 + math.log(KAPPA[parity])
    else:
        log_value = sol.log_minus_dpsi0 + math.log(KAPPA[parity])
    return DeterminantValue.from_log(log_value, parity, DetMethod.RECESSIVE, sol.error_estimate,
                                     R=sol.R, h0=h)


def recalibrate(tol: float = 1e-9) -> dict:
    """Re-derive KAPPA on V = q^2 at a few Lambda and compare with the frozen pair."""
    from .harmonic import harmonic_log_det

    out = {}
    for parity in Parity:
        ratios = []
        for lam in (0.0, 0.5, 1.0, 2.0):
            m = TrinomialMomentum(2, 0, 1.0, 0.0, lam)
            sol = recessive_solution(m)
            raw = sol.log_psi0 if parity is Parity.ODD else sol.log_minus_dpsi0
            ratios.append(cmath.exp(harmonic_log_det(parity, lam) - raw).real)
        kappa = float(np.mean(ratios))
        if abs(kappa - KAPPA[parity]) > tol or np.ptp(ratios) > tol:
            raise CalibrationError(f"kappa[{parity.value}] drifted to {kappa!r}")
        out[parity] = kappa
    return out
