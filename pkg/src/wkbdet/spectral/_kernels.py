"""Compiled kernels: asymptotic start data and the inward RK4 sweep.

The equation is psi'' = W(q) psi with W = u q^N + v q^M + lam on the real
half-line; v and lam may be complex.  Everything here works on plain
scalars so that numba can compile it once and release the GIL.
"""
import math

import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def _w(q, N, M, u, v, lam):
    return u * q**N + v * q**M + lam


@nb.njit(cache=True, nogil=True)
def _dw(q, N, M, u, v):
    d = u * N * q ** (N - 1)
    if M > 0:
        d += v * M * q ** (M - 1)
    return d


@nb.njit(cache=True, nogil=True)
def sqrt_series(p2, kmax):
    """Coefficients of sqrt(p2(t)) through t^kmax (principal root at t=0)."""
    P = np.zeros(kmax + 1, dtype=np.complex128)
    P[0] = np.sqrt(p2[0])
    for k in range(1, kmax + 1):
        acc = p2[k] if k < p2.shape[0] else 0j
        for i in range(1, k):
            acc -= P[i] * P[k - i]
        P[k] = acc / (2 * P[0])
    return P


@nb.njit(cache=True, nogil=True)
def start_data(N, M, u, v, lam, R, kmax):
    """Asymptotic data of the recessive solution at q = R.

    Returns (T, half_log_pi, omega, y, err):
      T        -sum_{rho != -1} beta_rho R^(rho+1)/(rho+1) - beta_{-1} log R
      half_log_pi  (1/2) log Pi(R) on the branch continuous from u > 0
      omega    higher-order WKB correction to log psi(R)
      y        psi'(R)/psi(R) from the Riccati series
      err      size of the first neglected term (relative)
    With t = 1/q, Pi = q^n P(t) and psi'/psi = -q^n Z(t), where
    Z^2 = P^2 + t^(n+1) (n Z - t Z_t), n = N/2.
    """
    n = N // 2
    p2 = np.zeros(N + 1, dtype=np.complex128)
    p2[0] = u
    p2[N - M] += v
    p2[N] += lam
    P = sqrt_series(p2, kmax)
    t = 1.0 / R

    # T(R) and log P, both convergent in t
    T = 0j
    logR = math.log(R)
    tk = 1.0
    quiet = 0
    conv_err = 0.0
    for i in range(kmax + 1):
        c = P[i]
        e = n - i + 1
        if e == 0:
            T -= c * logR
        else:
            T -= c * R**e / e
        # odd coefficients may vanish, so require a run of negligible terms
        quiet = quiet + 1 if abs(c) * tk < 1e-19 * abs(P[0]) else 0
        if i > 2 * N and quiet > N:
            break
        tk *= t
    else:
        conv_err = abs(P[kmax]) * tk

    # log P(t) via the series of log(p2/u); p2 is a trinomial so sum directly
    x = (v * t ** (N - M) + lam * t**N) / u
    half_log_pi = 0.5 * (n * logR + 0.5 * math.log(u.real) + 0.5 * np.log(1.0 + x))

    # Riccati series; stop at the smallest term.  Some coefficients vanish
    # identically (parity), so decisions look at a window of recent terms.
    Z = np.zeros(kmax + 1, dtype=np.complex128)
    Z[0] = P[0]
    y = -R**n * Z[0]
    omega = 0j
    window = N + 2
    recent = np.zeros(window)
    best = 1e300
    tk = 1.0
    err = 0.0
    for k in range(1, kmax + 1):
        tk *= t
        acc = p2[k] if k <= N else 0j
        if k >= n + 1:
            acc += (2 * n + 1 - k) * Z[k - n - 1]
        for i in range(1, k):
            acc -= Z[i] * Z[k - i]
        Z[k] = acc / (2 * Z[0])
        term_y = -R**n * Z[k] * tk
        size = abs(term_y)
        recent[k % window] = size
        if k > window:
            wmax = recent.max()
            if wmax > 4.0 * best:
                # asymptotic series has turned; drop this term
                err = best
                break
            if wmax < best:
                best = wmax
        y += term_y
        j = k - n
        if j >= 2:
            omega -= (P[k] - Z[k]) * R ** (1 - j) / (j - 1)
        if k > window and recent.max() < 1e-18 * abs(y):
            err = recent.max()
            break
    else:
        err = best

    # remaining part of omega': (1/2) n t - (1/2) t^2 P_t/P, minus the t^1 piece
    # that cancels against P_{n+1} - Z_{n+1} = -n/2.  Expand t P_t / P = t d/dt log P.
    # d/dt log P = (1/2) d/dt log(1 + x);  t d/dt x = (N-M) a t^(N-M) + N b t^N
    # Integrate -(1/2) t^2 P_t/P termwise in q: contribution
    #   -int_R^inf [-(1/2) t^2 P_t/P] dq = (1/2) int_0^t P_t/P dt' = (1/2) log P(t) - (1/2) log P(0)
    omega += 0.25 * np.log(1.0 + x)
    return T, half_log_pi, omega, y, err / abs(y) + conv_err


@nb.njit(cache=True, nogil=True)
def sweep(N, M, u, v, lam, R, h0, y0, p0):
    """RK4 from q = R down to q = 0 with renormalisation.

    Returns (logscale, y, p, phase_y, phase_p, nodes, steps): the solution
    at 0 is exp(logscale) * (y, p); the phases are the continuous arguments
    accumulated along the path; nodes counts sign changes of Re y on (0, R).
    """
    q = R
    y = y0
    p = p0
    logscale = 0.0
    ph_y = 0.0
    ph_p = 0.0
    nodes = 0
    steps = 0
    while q > 0.0:
        W = _w(q, N, M, u, v, lam)
        dW = _dw(q, N, M, u, v)
        s = max(1.0, math.sqrt(abs(W)), abs(dW) ** (1.0 / 3.0))
        h = h0 / s
        if q - h < 0.25 * h:
            h = q
        d = -h
        qm = q + 0.5 * d
        qe = q + d
        if qe < 0.0:
            qe = 0.0
        Wm = _w(qm, N, M, u, v, lam)
        We = _w(qe, N, M, u, v, lam)
        k1y = p
        k1p = W * y
        k2y = p + 0.5 * d * k1p
        k2p = Wm * (y + 0.5 * d * k1y)
        k3y = p + 0.5 * d * k2p
        k3p = Wm * (y + 0.5 * d * k2y)
        k4y = p + d * k3p
        k4p = We * (y + d * k3y)
        yn = y + d / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        pn = p + d / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        if y != 0:
            ph_y += np.angle(yn / y)
        if p != 0:
            ph_p += np.angle(pn / p)
        if qe > 0.0 and (yn.real > 0.0) != (y.real > 0.0) and yn.real != 0.0:
            nodes += 1
        nrm = abs(yn) + abs(pn)
        if nrm > 1e60 or nrm < 1e-60:
            yn /= nrm
            pn /= nrm
            logscale += math.log(nrm)
        y = yn
        p = pn
        q = qe
        steps += 1
    return logscale, y, p, ph_y, ph_p, nodes, steps


@nb.njit(cache=True, nogil=True)
def shoot(N, M, u, v, lam, R, h0, y0, p0):
    """Scale-free boundary data (y, p)/|(y, p)| at q = 0 plus node count."""
    logscale, y, p, ph_y, ph_p, nodes, steps = sweep(N, M, u, v, lam, R, h0, y0, p0)
    nrm = math.sqrt(abs(y) ** 2 + abs(p) ** 2)
    return y / nrm, p / nrm, nodes
