"""Parity-resolved eigenvalues by shooting, and the Bohr-Sommerfeld tail model."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np
from scipy import optimize

from ..actions import TrinomialMomentum
from ..errors import DomainError, NumericalError
from . import _kernels
from .recessive import default_radius, start_point
from .types import Parity, ParitySpectrum, WeylModel

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
# map to w in (0, 1)
_W = 0.5 * (_GL_X + 1.0)
_WW = 0.5 * _GL_W


def _real_params(m: TrinomialMomentum):
    if not m.is_real_positive:
        raise DomainError("eigenvalues need real non-negative parameters")
    N, M = m.N, m.M
    u = float(m.u.real if isinstance(m.u, complex) else m.u)
    v = float(m.v.real if isinstance(m.v, complex) else m.v)
    return N, M, u, v


def _floor(N, M, u, v) -> float:
    return v if M == 0 else 0.0


def turning_point(N, M, u, v, E):
    """Positive root a of u a^N + v a^M = E (vectorised Newton from above)."""
    E = np.asarray(E, dtype=float)
    c = E - (v if M == 0 else 0.0)
    if np.any(c <= 0):
        raise DomainError("energy below the bottom of the well")
    a = (c / u) ** (1.0 / N)
    if M == 0 or v == 0:
        return a
    for _ in range(100):
        f = u * a**N + v * a**M - E
        df = N * u * a ** (N - 1) + M * v * a ** (M - 1)
        step = f / df
        a = a - step
        if np.all(np.abs(step) <= 1e-15 * a):
            break
    return a


def bs_action(N, M, u, v, E):
    """(S(E), S'(E)) with S = int_{-a}^{a} sqrt(E - V) dq, vectorised in E."""
    E = np.atleast_1d(np.asarray(E, dtype=float))
    a = turning_point(N, M, u, v, E)[:, None]
    # q = a (1 - w^2) removes the square-root endpoint behaviour
    q = a * (1.0 - _W**2)[None, :]
    gap = E[:, None] - (u * q**N + v * q**M)
    gap = np.maximum(gap, 0.0)
    jac = 2.0 * a * _W[None, :]
    S = 2.0 * np.sum(_WW * np.sqrt(gap) * jac, axis=1)
    with np.errstate(divide="ignore"):
        dS = np.sum(_WW * jac / np.sqrt(gap), axis=1)
    return S, dS


def _leading_amplitude(N, u):
    # S(E) ~ 2 u^(-1/N) E^(1/2 + 1/N) B with B = int_0^1 sqrt(1 - t^N) dt
    B = math.gamma(1 + 1.0 / N) * math.gamma(1.5) / math.gamma(1.5 + 1.0 / N)
    return 2.0 * u ** (-1.0 / N) * B


def bs_energy(N, M, u, v, x):
    """Energies with S(E) = pi x, vectorised (x = n + 1/2 for Bohr-Sommerfeld)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    target = math.pi * x
    floor = _floor(N, M, u, v)
    A = _leading_amplitude(N, u)
    p = 0.5 + 1.0 / N
    E = floor + (np.maximum(target, 1e-300) / A) ** (1.0 / p)
    # S is increasing and concave in E, Newton from below stays below
    for _ in range(100):
        S, dS = bs_action(N, M, u, v, E)
        step = (target - S) / dS
        E = E + step
        if np.all(np.abs(step) <= 4e-16 * E):
            break
    return E


def _shoot_value(N, M, u, v, E, parity, h0, ratio=0.5):
    lam = complex(-E)
    R = default_radius(N, M, u, v, lam, ratio)
    R, _, y, _ = start_point(N, M, u, complex(v), lam, R, tol=1e-13)
    yy, pp, nodes = _kernels.shoot(N, M, u, complex(v), lam, R, h0, 1.0 + 0j, y)
    val = pp.real if parity is Parity.EVEN else yy.real
    return val, nodes


def _root(N, M, u, v, parity, lo, hi, h0, xtol):
    f = lambda E: _shoot_value(N, M, u, v, E, parity, h0)[0]
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        return None
    return optimize.brentq(f, lo, hi, xtol=xtol, rtol=1e-15, maxiter=200)


def _level(N, M, u, v, parity, k, h0, tol, guess=None):
    """(E, error, nodes); shrinks the step until the Richardson error meets tol.

    ``tol`` is relative to max(1, E).  ``guess`` = (E, halfwidth) narrows
    the first bracket; the Bohr-Sommerfeld window is the fallback.
    """
    for _ in range(4):
        E, err, nodes = _level_at(N, M, u, v, parity, k, h0, tol, guess)
        if err <= tol * max(1.0, E):
            break
        h0 *= max(0.25, 0.8 * (tol * max(1.0, E) / err) ** 0.25)
        guess = (E, 10 * err + 1e-12 * E)
    return E, err, nodes


def _level_at(N, M, u, v, parity, k, h0, tol, guess):
    n = 2 * k + parity.offset
    floor = _floor(N, M, u, v)
    E1 = None
    xtol = 0.25 * tol
    if guess is not None:
        g, w = guess
        xtol = 0.25 * tol * max(1.0, g)
        E1 = _root(N, M, u, v, parity, max(g - w, floor + 1e-12), g + w, h0, xtol)
    if E1 is None:
        edges = bs_energy(N, M, u, v, [max(n, 1e-9), n + 1.0])
        lo = floor + 1e-12 if n == 0 else float(edges[0])
        hi = float(edges[1])
        xtol = 0.25 * tol * max(1.0, lo)
        E1 = _root(N, M, u, v, parity, lo, hi, h0, xtol)
    if E1 is None:
        # widen once by a full level on each side
        wide = bs_energy(N, M, u, v, [max(n - 1.0, 1e-9), n + 2.0])
        lo = floor + 1e-12 if n <= 1 else float(wide[0])
        E1 = _root(N, M, u, v, parity, lo, float(wide[1]), h0, xtol)
        if E1 is None:
            raise NumericalError(f"non-bracketed root: level {k} ({parity.value}) not in window")
    # the half step refines inside a narrow window
    span = max(1e-7 * E1, 50 * xtol)
    E2 = None
    for _ in range(6):
        E2 = _root(N, M, u, v, parity, E1 - span, E1 + span, h0 / 2, xtol)
        if E2 is not None:
            break
        span *= 10
    if E2 is None:
        raise NumericalError("eigenvalue moved out of its window on refinement")
    E = E2 + (E2 - E1) / 15.0
    # nodes on (0, R) count the odd levels below the energy, so level k of
    # either parity has k of them; odd levels are probed just below E so the
    # zero at the origin stays out of the interval
    probe = E - (2 * span if parity is Parity.ODD else 0.0)
    _, nodes = _shoot_value(N, M, u, v, probe, parity, h0 / 2)
    return E, abs(E2 - E1) / 15.0, nodes


def _predict(N, M, u, v, parity, levels):
    """Next level from the smooth Bohr-Sommerfeld residual of the previous ones."""
    k = len(levels)
    n = 2 * np.arange(k) + parity.offset
    s = bs_action(N, M, u, v, np.asarray(levels))[0] / math.pi
    r = n + 0.5 - s
    # cubic extrapolation in the index, plus its own spread as a width
    pts = np.arange(k - 4, k)
    c = np.polyfit(pts, r[-4:], 3)
    r_next = np.polyval(c, k)
    c2 = np.polyfit(pts[1:], r[-3:], 2)
    spread = abs(np.polyval(c2, k) - r_next)
    n_next = 2 * k + parity.offset
    E = float(bs_energy(N, M, u, v, [n_next + 0.5 - r_next])[0])
    dEdn = 1.0 / (bs_action(N, M, u, v, [E])[1][0] / math.pi)
    return E, 20.0 * (spread + 1e-9) * dEdn + 1e-10 * E


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("WKBDET_THREADS", "1")))
    except ValueError:
        return 1


def residual_powers(N, M, v, count: int) -> tuple:
    """Exponents p in the Bohr-Sommerfeld residual sum_p c_p s^(-p), s = S(E)/pi.

    Higher WKB orders give odd powers 2k - 1; the q^M term adds steps of
    2 (N - M)/(N + 2).
    """
    step = 2.0 * (N - M) / (N + 2) if (M > 0 and v != 0) else 0.0
    out = set()
    for k in range(1, 8):
        for l in range(0, 12 if step else 1):
            out.add(round(2 * k - 1 + l * step, 12))
    return tuple(sorted(out)[:count])


def weyl_model(N, M, u, v, parity, levels, fit_terms: int = 4) -> WeylModel:
    """Fit n + 1/2 - S(E_n)/pi = sum_p c_p s^(-p) on the upper two thirds of the levels."""
    levels = np.asarray(levels, dtype=float)
    n = 2 * np.arange(levels.size) + parity.offset
    s = bs_action(N, M, u, v, levels)[0] / math.pi
    resid = n + 0.5 - s
    take = slice(levels.size // 3, None)
    fit_terms = min(fit_terms, (levels.size - levels.size // 3) // 3)
    powers, coeffs = (), ()
    if fit_terms > 0 and np.max(np.abs(resid)) > 1e-13:
        powers = residual_powers(N, M, v, fit_terms)
        X = np.stack([s[take] ** (-p) for p in powers], axis=1)
        coeffs = tuple(float(c) for c in np.linalg.lstsq(X, resid[take], rcond=None)[0])
    model = WeylModel(2.0 * N / (N + 2), (math.pi / _leading_amplitude(N, u)) ** (2.0 * N / (N + 2)),
                      coeffs, powers, 0.0)
    pred = model_energy(N, M, u, v, model, n[-3:])
    rel = float(np.max(np.abs(pred - levels[-3:]) / levels[-3:]))
    return WeylModel(model.exponent, model.amplitude, coeffs, powers, rel)


def model_energy(N, M, u, v, model: WeylModel, n):
    """Energies of the tail model at (possibly fractional) level indices n."""
    x = np.atleast_1d(np.asarray(n, dtype=float)) + 0.5
    s = x.copy()
    # solve s + sum c_j s^(-p_j) = x by fixed point; corrections are small
    for _ in range(60):
        corr = sum(c * s ** (-p) for c, p in zip(model.coeffs, model.powers)) if model.coeffs else 0.0
        s_new = x - corr
        if np.all(np.abs(s_new - s) <= 1e-15 * x):
            s = s_new
            break
        s = s_new
    return bs_energy(N, M, u, v, s)


def model_counting_density(N, M, u, v, model: WeylModel, E):
    """dn/dE of the tail model (global index n)."""
    S, dS = bs_action(N, M, u, v, E)
    s = S / math.pi
    ds = dS / math.pi
    d = np.ones_like(s)
    for c, p in zip(model.coeffs, model.powers):
        d = d - c * p * s ** (-p - 1)
    return ds * d


@lru_cache(maxsize=32)
def _cached_spectrum(N, M, u, v, parity, count, tol, h0):
    nthreads = _threads()
    if nthreads > 1 and count > 4:
        work = lambda k: _level(N, M, u, v, parity, k, h0, tol)
        with ThreadPoolExecutor(nthreads) as pool:
            res = list(pool.map(work, range(count)))
    else:
        # sequential: each level brackets the next through extrapolation
        res = []
        for k in range(count):
            guess = None
            if k >= 6:
                guess = _predict(N, M, u, v, parity, [r[0] for r in res])
            res.append(_level(N, M, u, v, parity, k, h0, tol, guess))
    levels = np.array([r[0] for r in res])
    errs = np.array([r[1] for r in res])
    nodes = [r[2] for r in res]
    for k, nd in enumerate(nodes):
        if nd != k:
            raise NumericalError(f"node count {nd} != {k} for {parity.value} level {k}")
    return levels, errs


def eigenvalues(m: TrinomialMomentum, parity, count: int, tol: float = 1e-10,
                h0: float = 0.02) -> ParitySpectrum:
    """First ``count`` eigenvalues of -d^2/dq^2 + V in one parity sector.

    Shooting from the asymptotic recessive start; Bohr-Sommerfeld windows
    bracket each level, brentq refines, and two step sizes are combined by
    Richardson extrapolation.  The lam field of ``m`` is ignored.
    """
    parity = Parity.coerce(parity)
    if count < 1:
        raise DomainError("count must be at least 1")
    N, M, u, v = _real_params(m)
    levels, errs = _cached_spectrum(N, M, u, v, parity, int(count), float(tol), float(h0))
    if np.max(errs / np.maximum(1.0, levels)) > tol:
        raise NumericalError(f"eigenvalue step error {np.max(errs):.2e} exceeds tol {tol:.1e}")
    model = weyl_model(N, M, u, v, parity, levels)
    return ParitySpectrum(parity, levels, model, int(count), tol,
                          {"step_error": errs, "N": N, "M": M, "u": u, "v": v})
