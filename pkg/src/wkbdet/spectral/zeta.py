"""Zeta functions and determinants built from the spectrum.

log_det integrates Z(1, lam) in lam (twice for N = 2) and fixes the
constant by the classical large-lam form log D_cl = I(lam) +/- (1/4) log lam:
the difference c(L) = log D_cl(L) - sum_k log((lam_k + L)/(lam_k + lam))
tends to log D(lam) as L grows, with corrections in the Jost ladder
L^(-gamma), gamma = k (N+2)/(2N) + l (N-M)/N.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from ..actions import (
    TrinomialMomentum,
    action_binomial,
    action_numeric,
    action_perfect_square,
    action_quartic,
)
from ..errors import DomainError, NumericalError
from .harmonic import harmonic_log_det
from .recessive import _residue_now
from .spectrum import _real_params, eigenvalues, model_counting_density, model_energy
from .types import DeterminantValue, DetMethod, Parity, ParitySpectrum

DEFAULT_COUNT = 60


def residue(m: TrinomialMomentum) -> complex:
    """beta_{-1}(0) including the lam dependence (which only matters for N = 2)."""
    u = float(m.u.real if isinstance(m.u, complex) else m.u)
    return _residue_now(m.N, m.M, u, complex(m.v), complex(m.lam))


def canonical_action(m: TrinomialMomentum) -> float:
    """I(lam, v) for real non-negative parameters, closed form where one exists."""
    N, M, u, v = _real_params(m)
    lam = float(m.lam.real if isinstance(m.lam, complex) else m.lam)
    if M == 0 or v == 0:
        if N == 2 or lam + (v if M == 0 else 0.0) != 0:
            return action_binomial(u, lam + (v if M == 0 else 0.0), N, 0).value
        return 0.0
    if lam == 0:
        return action_binomial(u, v, N, M).value
    if N == 4 and M == 2 and u == 1.0:
        return action_quartic(v, lam).value
    if 2 * M == N and (N // 2) % 2 == 0 and u == 1.0 and abs(v * v - 4 * lam) <= 1e-14 * v * v:
        return action_perfect_square(TrinomialMomentum(N, M, u, v, lam)).value
    return action_numeric(TrinomialMomentum(N, M, u, v, lam), tol=1e-10).value


def classical_log_det(m: TrinomialMomentum, parity) -> float:
    """log D_cl = I(lam) +/- (1/4) log lam."""
    parity = Parity.coerce(parity)
    lam = float(m.lam.real if isinstance(m.lam, complex) else m.lam)
    if lam <= 0:
        raise DomainError("classical determinant needs lam > 0")
    return canonical_action(m) + parity.sign * 0.25 * math.log(lam)


def _classical_slope(m: TrinomialMomentum, parity) -> float:
    """d/dlam log D_cl for the binomial (M = 0) case, by a complex step."""
    if m.M != 0:
        raise DomainError("classical slope is only needed for M = 0")
    parity = Parity.coerce(parity)
    u = float(m.u)
    lam = float(m.lam) + float(m.v)
    h = 1e-20 * max(1.0, lam)
    dI = action_binomial(u, complex(lam, h), m.N, 0).value.imag / h
    return dI + parity.sign * 0.25 / float(m.lam)


def spectrum_for(m: TrinomialMomentum, parity, count: int | None = None,
                 tol: float = 1e-11) -> ParitySpectrum:
    return eigenvalues(m, parity, count or DEFAULT_COUNT, tol=tol)


# -- sums over the spectrum with a Bohr-Sommerfeld tail -------------------

_TAIL_GL = np.polynomial.legendre.leggauss(24)
_TAIL_KNOTS = np.concatenate([[0.0], np.geomspace(1e-12, 1.0, 25)])


@lru_cache(maxsize=64)
def _tail_nodes(N, M, u, v, parity, K, coeffs, powers, alpha):
    """Energies and weights for int_{E_K}^inf F(E) dn_parity in tau = (E_K/E)^alpha.

    Returns (E nodes, weights including density and Jacobian, Euler-Maclaurin
    abscissae energies).  The integrand tends to a constant as tau -> 0, so
    the innermost panel [0, 1e-12] matters when that constant is large.
    """
    from .types import WeylModel

    model = WeylModel(0.0, 0.0, coeffs, powers)
    p = parity.offset
    E_K = float(model_energy(N, M, u, v, model, [2 * K + p])[0])
    x, w = _TAIL_GL
    taus, wts = [], []
    for lo, hi in zip(_TAIL_KNOTS[:-1], _TAIL_KNOTS[1:]):
        taus.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        wts.append(0.5 * (hi - lo) * w)
    tau = np.concatenate(taus)
    wt = np.concatenate(wts)
    E = E_K * tau ** (-1.0 / alpha)
    dens = 0.5 * model_counting_density(N, M, u, v, model, E)
    weights = wt * dens * (E_K / alpha) * tau ** (-1.0 / alpha - 1.0)
    em_x = K + 0.5 * np.arange(-3.0, 4.0)
    em_E = model_energy(N, M, u, v, model, 2 * em_x + p)
    return E, weights, em_E


def _tail(ps: ParitySpectrum, f, N, M, u, v, decay: float):
    """sum_{k >= K} f(E_k) from the tail model by Euler-Maclaurin.

    f maps an array of energies to an array (real or complex) and
    f(E) dn/dE must fall off like E^(-decay) with decay > 1.  The integral
    is mapped to tau = (E_K/E)^(decay - 1) in (0, 1], where the leading
    behaviour becomes constant, and done by composite Gauss-Legendre on
    geometric panels.  Returns (value, error estimate).
    """
    alpha = decay - 1.0
    if alpha <= 0:
        raise DomainError("tail sum diverges")
    model = ps.weyl
    E, weights, em_E = _tail_nodes(N, M, u, v, ps.parity, ps.count, tuple(model.coeffs),
                                   tuple(model.powers), round(alpha, 14))
    vals = f(E) * weights
    integral = np.sum(vals)
    d = 0.5
    gm3, gm2, gm1, g0, gp1, gp2, gp3 = f(em_E)
    g1 = (-gp3 + 9 * gp2 - 45 * gp1 + 45 * gm1 - 9 * gm2 + gm3) / (-60 * d)
    g3 = (-gp3 + 8 * gp2 - 13 * gp1 + 13 * gm1 - 8 * gm2 + gm3) / (8 * d**3)
    g5 = (gp3 - 4 * gp2 + 5 * gp1 - 5 * gm1 + 4 * gm2 - gm3) / (2 * d**5)
    em = 0.5 * g0 - g1 / 12.0 + g3 / 720.0 - g5 / 30240.0
    value = integral + em
    err = abs(g5) / 30240.0 \
        + 1e-15 * (abs(value) + np.sum(np.abs(vals)))
    return value, float(err)


def _spectral_sum(ps: ParitySpectrum, f, N, M, u, v, decay):
    explicit = np.sum(f(ps.eigenvalues))
    tail, err = _tail(ps, f, N, M, u, v, decay)
    return explicit + tail, err + 1e-16 * ps.count * abs(explicit)


def zeta(m: TrinomialMomentum, parity, s: complex, lam=None, *, count: int | None = None,
         spectrum: ParitySpectrum | None = None) -> tuple[complex, float]:
    """Z+/-(s, lam) = sum_k (lam_k + lam)^(-s) over one parity sector.

    Returns (value, error estimate).  s = 0 returns -beta_{-1}/N +/- 1/4;
    for N = 2, s = 1 returns the finite part at the pole.
    """
    parity = Parity.coerce(parity)
    lam = m.lam if lam is None else lam
    N, M, u, v = _real_params(m)
    if s == 0:
        b = residue(m.with_(lam=lam))
        val = -b / N + parity.sign * 0.25
        return (val.real if val.imag == 0 else val), 0.0
    abscissa = 0.5 + 1.0 / N
    finite_part = N == 2 and s == 1
    if complex(s).real <= abscissa and not finite_part:
        raise DomainError(f"Re s = {complex(s).real} is not beyond the abscissa {abscissa}")
    ps = spectrum or spectrum_for(m, parity, count)
    lam_c = complex(lam)
    if lam_c.imag == 0:
        lam_c = lam_c.real
    if finite_part:
        explicit = np.sum(1.0 / (ps.eigenvalues + lam_c))
        tail, err = _finite_part_tail(ps, N, M, u, v, lam_c)
        return explicit + tail, err
    f = lambda E: (E + lam_c) ** (-s)
    return _spectral_sum(ps, f, N, M, u, v, complex(s).real + 0.5 - 1.0 / N)


def _finite_part_tail(ps, N, M, u, v, lam_c):
    """Finite part at s = 1 of sum_{k >= K} (E_k + lam)^(-s), equally spaced tail."""
    K = ps.count
    p = ps.parity.offset
    E = model_energy(N, M, u, v, ps.weyl, 2 * (K + np.arange(0, 3)) + p)
    step = E[1] - E[0]
    if abs(E[2] - 2 * E[1] + E[0]) > 1e-9 * E[0]:
        raise DomainError("finite part at s = 1 needs an equally spaced spectrum (N = 2)")
    w = 1.0 / (E[0] + lam_c)
    # derivatives of g(k) = 1/(E_K + k step + lam) in the index k
    g1 = -step * w**2
    g3 = -6 * step**3 * w**4
    g5 = -120 * step**5 * w**6
    # int_K^inf of the tail is (1/step) int dE/(E + lam); its finite part is
    # -(1/step) log(E_K + lam)
    val = -np.log(E[0] + lam_c) / step + 0.5 * w - g1 / 12.0 + g3 / 720.0 - g5 / 30240.0
    return val, abs(g5) / 30240.0 + 1e-16 * abs(val)


# -- determinants -----------------------------------------------------------

def _clog1p(z):
    """log(1 + z) to relative accuracy for small complex z.

    numpy's complex log1p loses the real part to absolute round-off, which
    the tail quadrature weights amplify at large energies.
    """
    z = np.asarray(z)
    if not np.iscomplexobj(z):
        return np.log1p(z)
    a, b = z.real, z.imag
    return 0.5 * np.log1p(2 * a + a * a + b * b) + 1j * np.arctan2(b, 1 + a)


def _log1p_minus_x(x):
    """log(1 + x) - x without cancellation for small |x|."""
    x = np.asarray(x)
    small = np.abs(x) < 1e-2
    xs = np.where(small, x, 0.0)
    series = sum((-1) ** (k + 1) * xs**k / k for k in range(2, 10))
    xl = np.where(small, 0.5, x)
    return np.where(small, series, _clog1p(xl) - xl)


def jost_exponents(N, M, v, count: int) -> list:
    gam = set()
    a = (N + 2) / (2 * N)
    b = (N - M) / N if (M > 0 and v != 0) else 0.0
    for k in range(1, 10):
        for l in range(0, 12 if b else 1):
            gam.add(round(k * a + l * b, 12))
    return sorted(gam)[:count]


def _log_det_samples(m: TrinomialMomentum, parity: Parity, lam: float, ps: ParitySpectrum,
                     grid: np.ndarray):
    """c(L) on the grid: classical part minus the integrated zeta function."""
    N, M, u, v = _real_params(m)
    cs, errs = [], []
    for L in grid:
        mL = m.with_(lam=float(L))
        if N == 2:
            f = lambda E: _log1p_minus_x((lam - L) / (E + L))
            S, e = _spectral_sum(ps, f, N, M, u, v, 2.5 - 1.0 / N)
            c = classical_log_det(mL, parity) + (lam - L) * _classical_slope(mL, parity) + S
        else:
            f = lambda E: np.log1p((lam - L) / (E + L))
            S, e = _spectral_sum(ps, f, N, M, u, v, 1.5 - 1.0 / N)
            c = classical_log_det(mL, parity) + S
        cs.append(c)
        errs.append(e)
    return np.array(cs), max(errs)


def _ladder_fit(grid, cs, gam):
    X = np.stack([np.ones_like(grid)] + [grid ** (-g) for g in gam], axis=1)
    # column scaling keeps the least-squares problem well conditioned
    scale = np.max(np.abs(X), axis=0)
    coef, *_ = np.linalg.lstsq(X / scale, cs, rcond=None)
    return coef[0] / scale[0]


def log_det(m: TrinomialMomentum, parity, lam=None, tol: float = 1e-8, *,
            count: int | None = None, spectrum: ParitySpectrum | None = None) -> DeterminantValue:
    """log D+/-(lam) from the zeta function integrated in lam.

    Two fits with different numbers of ladder terms give the error estimate.
    """
    parity = Parity.coerce(parity)
    lam = float(m.lam if lam is None else lam)
    if lam < 0:
        raise DomainError("log_det needs real lam >= 0")
    N, M, u, v = _real_params(m)
    m0 = m.with_(lam=0.0)
    ps = spectrum or spectrum_for(m0, parity, count)
    E_top = ps.eigenvalues[-1]
    base = max(E_top, 10.0 * max(1.0, lam), 50.0)
    grid = base * 2.0 ** np.arange(0, 8)
    cs, serr = _log_det_samples(m0, parity, lam, ps, grid)
    gam = jost_exponents(N, M, v, 6)
    c1 = _ladder_fit(grid, cs, gam[:5])
    c2 = _ladder_fit(grid[1:], cs[1:], gam[:4])
    c3 = _ladder_fit(grid, cs, gam[:6])
    err = 4.0 * max(abs(c1 - c2), abs(c1 - c3)) + serr
    if err > tol:
        raise NumericalError(f"tail-budget: log_det error {err:.2e} exceeds tol {tol:.1e}")
    return DeterminantValue.from_log(c1, parity, DetMethod.ZETA, err, grid=grid.tolist(),
                                     count=ps.count)


def det_entire(m: TrinomialMomentum, parity, lam=None, *, count: int | None = None,
               tol: float = 1e-8) -> DeterminantValue:
    """D+/-(lam) = D+/-(0) prod_k (1 + lam/lam_k) for complex lam (N >= 4)."""
    parity = Parity.coerce(parity)
    if m.N < 4:
        raise DomainError("the Hadamard product converges only for N >= 4")
    lam = complex(m.lam if lam is None else lam)
    N, M, u, v = _real_params(m.with_(lam=0.0))
    m0 = m.with_(lam=0.0)
    ps = spectrum_for(m0, parity, count)
    d0 = log_det(m0, parity, 0.0, tol=tol, spectrum=ps)
    if np.any(ps.eigenvalues + lam == 0):
        return DeterminantValue(0j, complex(-np.inf), parity, DetMethod.HADAMARD,
                                d0.error_estimate)
    lam_v = lam.real if lam.imag == 0 else lam
    f = lambda E: _clog1p(lam_v / E)
    S, err = _spectral_sum(ps, f, N, M, u, v, 1.5 - 1.0 / N)
    total = d0.log_value + S
    return DeterminantValue.from_log(total, parity, DetMethod.HADAMARD, d0.error_estimate + err,
                                     count=ps.count)


def symanzik_rescale(m: TrinomialMomentum, r: float | None = None):
    """Rescale q = r^(-1/2) x.

    Returns (m', log_factor) with m' the data of r^(-1) (H + lam) in x and
    log det+/-(H + lam) = log det+/-(H' + lam') + log_factor[parity], where
    log_factor = Z'+/-(0, lam') log r.  The default r normalises u to 1.
    """
    u = float(m.u.real if isinstance(m.u, complex) else m.u)
    if u <= 0:
        raise DomainError("symanzik scaling needs u > 0")
    if r is None:
        r = u ** (2.0 / (m.N + 2))
    if r <= 0:
        raise DomainError("scale factor must be positive")
    c = r ** -0.5
    scaled = TrinomialMomentum(m.N, m.M, u * c ** (m.N + 2), m.v * c ** (m.M + 2), m.lam * c**2)
    out = {}
    for parity in Parity:
        z0, _ = zeta(scaled, parity, 0)
        out[parity] = z0 * math.log(r)
    return scaled, out


def coupling_rescale_log_factor(M: int, v: float, lam: float, parity) -> float:
    """log of v^(+/-1/(2(M+2))) v^(-delta_{M,2} v^(-1/2) lam/8)."""
    parity = Parity.coerce(parity)
    out = parity.sign * math.log(v) / (2 * (M + 2))
    if M == 2:
        out -= math.log(v) * lam / (8 * math.sqrt(v))
    return out
