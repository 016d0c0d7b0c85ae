"""Canonical ("zeta-regularized") improper action integrals.

For a momentum Pi(q) = (u q^N + v q^M + lam)^(1/2) the integral
I = int_0^inf Pi(q) dq diverges; the canonical value is the primitive in
lam of the convergent dI/dlam = 1/2 int_0^inf Pi^(-1) dq whose large-lam
expansion has no lam^0 term.  Closed forms cover binomials, perfect
squares and the even quartic; :func:`action_numeric` evaluates the
definition directly and serves as the independent oracle.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError
from .specfun import Modulus, ellip_KE, gamma, rgamma

__all__ = [
    "TrinomialMomentum",
    "RegularizedAction",
    "ActionMethod",
    "power_series_pow",
    "momentum_series",
    "beta_coeff",
    "action_binomial",
    "perfect_square_integral",
    "action_perfect_square",
    "action_quartic",
    "quartic_elliptic_branches",
    "contour_primitive_quartic",
    "action_numeric",
    "action_large_v",
    "quartic_large_v_expansion",
    "QuarticLargeVSeries",
]


class ActionMethod(str, enum.Enum):
    BINOMIAL = "binomial-closed"
    PERFECT_SQUARE = "perfect-square"
    QUARTIC = "quartic-elliptic"
    NUMERIC = "numeric-canonical"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class RegularizedAction:
    value: complex
    method: ActionMethod
    residue: complex = 0.0
    error_estimate: float = 0.0
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method is ActionMethod.NUMERIC and not self.error_estimate > 0:
            raise ValueError("numeric actions must carry a positive error estimate")


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


@dataclass(frozen=True)
class TrinomialMomentum:
    """Classical data of Pi(q)^2 = u q^N + v q^M + lam.

    ``v`` and ``lam`` may be complex; the closed forms only accept the
    non-negative real quadrant.  ``M = 0`` is allowed and simply shifts lam.
    """

    N: int
    M: int
    u: Any = 1.0
    v: Any = 0.0
    lam: Any = 0.0

    def __post_init__(self):
        if not (_is_int(self.N) and _is_int(self.M)):
            raise DomainError("degrees N, M must be integers")
        if self.N % 2 or self.M % 2:
            raise DomainError(f"degrees must be even, got N={self.N}, M={self.M}")
        if not (self.N >= 2 and 0 <= self.M < self.N):
            raise DomainError(f"need N >= 2 and 0 <= M < N, got N={self.N}, M={self.M}")
        if self.u == 0:
            raise DomainError("leading coefficient u must be non-zero")

    @property
    def j(self) -> Fraction:
        return Fraction(self.N + 2, 2 * (self.N - self.M))

    @property
    def is_real_positive(self) -> bool:
        return all(
            not isinstance(c, complex) or c.imag == 0 for c in (self.u, self.v, self.lam)
        ) and _re(self.u) > 0 and _re(self.v) >= 0 and _re(self.lam) >= 0

    def potential(self, q):
        return self.u * q**self.N + self.v * q**self.M

    def pi_squared(self, q):
        return self.potential(q) + self.lam

    def with_(self, **kw) -> "TrinomialMomentum":
        d = dict(N=self.N, M=self.M, u=self.u, v=self.v, lam=self.lam)
        d.update(kw)
        return TrinomialMomentum(**d)

    def residue(self) -> complex:
        """beta_{-1}(0), the residue of Pi at q = infinity."""
        return beta_coeff(self, -1, 0.0)


def _re(x) -> float:
    return x.real if isinstance(x, complex) else float(x)


def power_series_pow(p: np.ndarray, alpha: complex, order: int) -> np.ndarray:
    """Coefficients of p(t)^alpha through t^order, for p(0) = 1.

    Uses the recurrence n y_n = sum_k (alpha k - (n - k)) p_k y_{n-k}.
    """
    p = np.asarray(p, dtype=complex)
    if p[0] != 1:
        raise ValueError("power_series_pow needs p[0] == 1")
    y = np.zeros(order + 1, dtype=complex)
    y[0] = 1.0
    nz = [k for k in range(1, min(len(p), order + 1)) if p[k] != 0]
    for n in range(1, order + 1):
        acc = 0j
        for k in nz:
            if k > n:
                break
            acc += (alpha * k - (n - k)) * p[k] * y[n - k]
        y[n] = acc / n
    return y


def momentum_series(m: TrinomialMomentum, alpha: complex, order: int) -> np.ndarray:
    """Coefficients c_i with (Pi^2)^alpha ~ q^(N alpha) sum_i c_i q^(-i)."""
    p = np.zeros(order + 1, dtype=complex)
    p[0] = 1.0
    if m.N - m.M <= order:
        p[m.N - m.M] += m.v / m.u
    if m.N <= order:
        p[m.N] += m.lam / m.u
    return complex(m.u) ** alpha * power_series_pow(p, alpha, order)


def beta_coeff(m: TrinomialMomentum, rho, s: complex = 0.0, depth: int = 64) -> complex:
    """beta_rho(s): coefficient of q^(rho - N s) in the large-q expansion of
    (Pi^2)^(1/2 - s).  rho runs down the ladder N/2, N/2 - 1, ...
    """
    i = Fraction(m.N, 2) - Fraction(rho)
    if i < 0:
        return 0j
    if i.denominator != 1:
        return 0j
    i = int(i)
    if i > depth:
        raise DomainError(f"rho = {rho} lies deeper than the truncation depth {depth}")
    return complex(momentum_series(m, 0.5 - s, i)[i])


def _binom_half_integer_j(j: int) -> Fraction:
    # (-1)^(j-1) (2j-2)! / (2^(2j-1) (j-1)! j!)
    return Fraction((-1) ** (j - 1) * math.factorial(2 * j - 2),
                    2 ** (2 * j - 1) * math.factorial(j - 1) * math.factorial(j))


def _cpow(x, a):
    """Principal power with exact handling of real positive bases."""
    if not isinstance(x, complex) and x >= 0:
        return float(x) ** float(a)
    return complex(x) ** float(a)


def _clog(x):
    if not isinstance(x, complex) and x > 0:
        return math.log(x)
    return cmath.log(x)


def action_binomial(u, v, N: int, M: int) -> RegularizedAction:
    """Canonical int_0^inf (u q^N + v q^M)^(1/2) dq.

    Uses the Gamma-function continuation when j = (N+2)/(2(N-M)) is not an
    integer, and the logarithmic renormalised form otherwise.  Complex ``v``
    is accepted (principal branches), which the functional module needs.
    """
    TrinomialMomentum(N, M, u, v)  # validation
    j = Fraction(N + 2, 2 * (N - M))
    if v == 0:
        return RegularizedAction(0.0, ActionMethod.BINOMIAL, 0.0, details={"branch": "zero"})
    if j.denominator != 1:
        jf = float(j)
        coef = (gamma(jf - 0.5) * gamma(-jf) / ((N - M) * gamma(-0.5))).real
        value = coef * _cpow(u, -jf + 0.5) * _cpow(v, jf)
        return RegularizedAction(value, ActionMethod.BINOMIAL, 0.0, details={"branch": "gamma"})
    ji = int(j)
    beta = float(_binom_half_integer_j(ji)) * _cpow(u, -ji + 0.5) * _cpow(v, ji)
    harmonic = sum(1.0 / k for k in range(1, ji + 1))
    odd = sum(1.0 / (2 * k - 1) for k in range(1, ji))
    bracket = _clog(v) - harmonic - (2.0 * M / N) * (math.log(2) + 0.5 * _clog(u) - odd)
    value = -2.0 * ji * beta / (N + 2) * bracket
    return RegularizedAction(value, ActionMethod.BINOMIAL, beta, details={"branch": "log"})


def perfect_square_integral(M: int, L: int, w, s: complex) -> complex:
    """Continuation in s of int_0^inf [(q^M + w q^L)^2]^(1/2 - s) dq."""
    if not (M > L >= 0) or not w > 0:
        raise DomainError("need M > L >= 0 and w > 0")
    d = M - L
    num = gamma((L * (1 - 2 * s) + 1) / d) * gamma(-(M * (1 - 2 * s) + 1) / d)
    return num * rgamma(2 * s - 1) / d * complex(w) ** ((M * (1 - 2 * s) + 1) / d)


def action_perfect_square(m: TrinomialMomentum) -> RegularizedAction:
    """Canonical action of an even perfect square (q^(N/2) + sqrt(lam))^2."""
    if m.M != m.N // 2:
        raise DomainError("perfect square needs M = N/2")
    if (m.N // 2) % 2:
        raise DomainError("N/2 odd: Pi^2 is not even, outside this setting")
    if not m.is_real_positive or m.u != 1:
        raise DomainError("perfect square needs u = 1 and real v, lam >= 0")
    if abs(m.v * m.v - 4 * m.lam) > 1e-12 * max(1.0, abs(m.v) ** 2):
        raise DomainError("v^2 != 4 lam: not a perfect square")
    if m.lam == 0:
        return action_binomial(1.0, 0.0, m.N, m.M)
    value = perfect_square_integral(m.N // 2, 0, math.sqrt(m.lam), 0.0)
    return RegularizedAction(value.real, ActionMethod.PERFECT_SQUARE, 0.0)


def _quartic_checked(v, lam):
    if isinstance(v, complex) or isinstance(lam, complex):
        raise DomainError("closed-form quartic action needs real v, lam")
    if v < 0 or lam < 0 or (v == 0 and lam == 0):
        raise DomainError("closed-form quartic action needs v, lam >= 0, not both 0")
    return float(v), float(lam)


def quartic_elliptic_branches(v, lam):
    """The two printed elliptic expressions, evaluated where defined.

    Returns a dict with keys ``"real_modulus"`` (v >= 2 sqrt(lam)) and
    ``"imaginary_modulus"`` (v <= 2 sqrt(lam), direct real-ktilde form).
    """
    v, lam = _quartic_checked(v, lam)
    r = math.sqrt(lam)
    out = {}
    if v >= 2 * r:
        out["real_modulus"] = _quartic_real_modulus(v, lam)
    if v <= 2 * r:
        kt = math.sqrt(2 * r - v) / (2 * lam**0.25)
        K, E = ellip_KE(Modulus.from_k(kt))
        out["imaginary_modulus"] = lam**0.25 * ((2 * r + v) * K - 2 * v * E) / 3
    return out


def _quartic_real_modulus(v, lam):
    r = math.sqrt(lam)
    if lam == 0:
        return -(v**1.5) / 3  # E(1) = 1 and the K term is multiplied by 0
    m = Modulus.from_kprime(math.sqrt(4 * r / (v + 2 * r)))
    K, E = ellip_KE(m)
    return math.sqrt(v + 2 * r) * (2 * r * K - v * E) / 3


def action_quartic(v, lam) -> RegularizedAction:
    """Canonical int_0^inf (q^4 + v q^2 + lam)^(1/2) dq for v, lam >= 0."""
    v, lam = _quartic_checked(v, lam)
    r = math.sqrt(lam)
    if v >= 2 * r:
        value = _quartic_real_modulus(v, lam)
        branch = "real_modulus"
    else:
        # continue the real-modulus form to k = i*kt/kt' via the imaginary
        # modulus transformation
        kt = math.sqrt(2 * r - v) / (2 * lam**0.25)
        K, E = ellip_KE(Modulus.imaginary(kt))
        value = (math.sqrt(v + 2 * r) * (2 * r * K - v * E) / 3)
        branch = "imaginary_modulus"
    return RegularizedAction(value, ActionMethod.QUARTIC, 0.0, details={"branch": branch})


def contour_primitive_quartic(v, lam) -> float:
    """Closed-form primitive of the bounded-contour action, v >= 2 sqrt(lam) > 0."""
    v, lam = _quartic_checked(v, lam)
    if lam <= 0 or v < 2 * math.sqrt(lam):
        raise DomainError("contour primitive needs v >= 2 sqrt(lam) > 0")
    disc = math.sqrt(max(v * v - 4 * lam, 0.0))
    qp = math.sqrt((v + disc) / 2)
    qm = math.sqrt(lam) / qp  # q+ q- = sqrt(lam), stable for small lam
    K, E = ellip_KE(Modulus.from_kprime(qm / qp))
    return -qp * (v * E - 2 * qm * qm * K) / 3


def _radius_eps(N: int, M: int) -> float:
    """Radius of convergence in eps of int (x^N + eps x^M + 1)^a dx."""
    if M == 0:
        return 1.0
    r = M / (N - M)
    return (N / (N - M)) * r ** (-M / N)


def _large_lam_series(m: TrinomialMomentum, lam: float, terms: int = 400):
    """Canonical I at large lam: sum_a e_a lam^alpha_a / alpha_a (+ log)."""
    N, M, u, v = m.N, m.M, float(m.u), float(m.v)
    if M == 0:
        v_eff, M_eff = 0.0, 0
        lam = lam + v
    else:
        v_eff, M_eff = v, M
    eps = v_eff * u ** (-M_eff / N) * lam ** (M_eff / N - 1) if M_eff else 0.0
    total = 0.0
    binom = 1.0  # C(-1/2, a)
    last = 0.0
    for a in range(terms):
        if a > 0:
            binom *= (-0.5 - (a - 1)) / a
        alpha = 0.5 + 1.0 / N + a * (M_eff / N - 1.0) if M_eff else 0.5 + 1.0 / N
        p = (M_eff * a + 1.0) / N
        beta_int = math.exp(math.lgamma(p) + math.lgamma(a + 0.5 - p) - math.lgamma(a + 0.5)) / N
        # a-th term of dI/dlam, proportional to lam^(alpha - 1)
        e_a = 0.5 * u ** (-1.0 / N) * lam ** (-0.5 + 1.0 / N) * binom * eps**a * beta_int
        if abs(alpha) < 1e-12:
            term = e_a * lam * math.log(lam)
        else:
            term = e_a * lam / alpha
        total += term
        if M_eff == 0:
            break
        if a > 4 and abs(term) < 1e-18 * abs(total) and abs(last) < 1e-18 * abs(total):
            break
        last = term
    else:
        raise NumericalError("large-lambda series did not converge")
    return total


def _difference_integral(m: TrinomialMomentum, lam_lo: float, lam_hi: float):
    """int_0^inf [(V+lam_hi)^(1/2) - (V+lam_lo)^(1/2)] dq and an error bound."""
    N, M, u, v = m.N, m.M, float(m.u), float(m.v)
    dl = lam_hi - lam_lo
    if dl == 0:
        return 0.0, 0.0

    def f(q):
        V = u * q**N + v * q**M
        return dl / (math.sqrt(V + lam_hi) + math.sqrt(V + lam_lo))

    Q = max(1.0, (100.0 * lam_hi / u) ** (1.0 / N))
    if M > 0 and v > 0:
        Q = max(Q, (100.0 * v / u) ** (1.0 / (N - M)))
    # split the finite range at the natural scales of the integrand
    knots = sorted({0.0, Q} | {s for s in (lam_hi ** (1.0 / N), (lam_lo + 1e-300) ** (1.0 / N),
                                           (v / u) ** (1.0 / (N - M)) if v > 0 else 0.0)
                               if 0 < s < Q})
    total, err = 0.0, 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        val, e = integrate.quad(f, a, b, epsabs=0.0, epsrel=2e-14, limit=400)
        total += val
        err += e
    order = 60
    hi = momentum_series(m.with_(lam=lam_hi), 0.5, order)
    lo = momentum_series(m.with_(lam=lam_lo), 0.5, order)
    diff = (hi - lo).real
    half = N // 2
    tail = 0.0
    for i in range(order + 1):
        expo = half - i  # term diff_i q^expo
        if expo >= -1:
            if abs(diff[i]) > 1e-12 * (1 + abs(hi[i])):
                raise NumericalError("non-integrable tail in difference integral")
            continue
        tail += diff[i] * Q ** (expo + 1) / (-(expo + 1))
    err += abs(diff[-1]) * Q ** (half - order + 1) + 1e-16 * abs(total)
    return total + tail, err


def action_numeric(m: TrinomialMomentum, tol: float = 1e-9) -> RegularizedAction:
    """Canonical action evaluated from its definition.

    I(lam) = S(L) - int_0^inf [Pi_L - Pi_lam] dq, where S is the convergent
    large-L expansion obtained by integrating the lam-derivative termwise
    (no lam^0 term by construction).  L runs over a geometric grid; the
    spread between two dilations of the grid is the stability criterion.
    """
    if m.N < 4:
        raise DomainError("numeric canonical action needs N >= 4")
    if not m.is_real_positive:
        raise DomainError("numeric canonical action needs positive real parameters")
    N, M, u, v, lam = m.N, m.M, float(m.u), float(_re(m.v)), float(_re(m.lam))
    if lam == 0 and (M > 0 or v == 0):
        return action_binomial(u, v, N, M)
    m = TrinomialMomentum(N, M, u, v, lam)
    if M == 0:
        lam0 = max(10.0 * (v + lam), 1.0)
    else:
        eps_target = 0.1 * _radius_eps(N, M)
        lam0 = (v * u ** (-M / N) / eps_target) ** (N / (N - M)) if v > 0 else 1.0
        lam0 = max(lam0, 1.0, lam)
    estimates, errors = [], []
    for i in range(4):
        L = lam0 * 2.0**i
        d, e = _difference_integral(m, lam, L)
        estimates.append(_large_lam_series(m, L) - d)
        errors.append(e)
    first = sum(estimates[:3]) / 3
    second = sum(estimates[1:]) / 3
    spread = max(estimates) - min(estimates)
    if abs(first - second) > tol:
        raise NumericalError(
            f"fit-unstable: canonical constant moved by {abs(first - second):.3e} > tol"
        )
    value = estimates[0]
    err = max(spread, max(errors), 1e-15 * max(1.0, abs(value)))
    return RegularizedAction(value, ActionMethod.NUMERIC, m.residue().real, err,
                             details={"grid": [lam0 * 2.0**i for i in range(4)],
                                      "estimates": estimates})


def action_large_v(N: int, M: int, lam, v) -> RegularizedAction:
    """Large-v asymptotic form of the trinomial action (binomial pieces)."""
    if not (M >= 2 and N > M):
        raise DomainError("large-v form needs N > M >= 2")
    outer = action_binomial(1.0, v, N, M)
    inner = action_binomial(v, lam, M, 0)
    extra = 0.0
    if M == 2:
        extra = N / (4.0 * (N - 2)) * _cpow(v, -0.5) * lam * (_clog(v) + 2 * math.log(2))
    value = outer.value + inner.value + extra
    return RegularizedAction(value, ActionMethod.ASYMPTOTIC, outer.residue,
                             details={"outer": outer.value, "inner": inner.value,
                                      "log_correction": extra})


MAX_LARGE_V_ORDER = 6


@dataclass(frozen=True)
class QuarticLargeVSeries:
    """I ~ sum c * v^power * (log v)^log_power at fixed lam."""

    lam: float
    order: int
    terms: tuple  # ((Fraction power, int log_power, float coefficient), ...)
    omitted: tuple  # next terms, for error control

    def __call__(self, v) -> float:
        return sum(c * v ** float(p) * math.log(v) ** r for p, r, c in self.terms)

    def coefficient(self, power, log_power: int = 0) -> float:
        for p, r, c in self.terms:
            if p == Fraction(power) and r == log_power:
                return c
        return 0.0

    def first_omitted(self, v) -> float:
        return abs(sum(c * v ** float(p) * math.log(v) ** r for p, r, c in self.omitted))


@lru_cache(maxsize=None)
def _symbolic_large_v(order: int):
    import sympy as sp

    x, ell, mu = sp.symbols("x ell mu", positive=True)
    # x = v^(-1/2), ell = log v, mu = lam^(1/4)
    kp2 = 4 * mu**2 * x**2 / (1 + 2 * mu**2 * x**2)
    L = sp.log(2) - sp.log(mu) + ell / 2 + sp.log(1 + 2 * mu**2 * x**2) / 2
    from .specfun import _near_one_coeffs

    co = _near_one_coeffs(order + 1)
    K = sum(sp.Rational(a) * kp2**n * (L - sp.Rational(b)) for n, (a, b, _, _) in enumerate(co[:order]))
    E = 1 + sum(sp.Rational(c) * kp2**n * (L - sp.Rational(d))
                for n, (_, _, c, d) in enumerate(co[: order + 1]) if n > 0)
    kp_m3 = (2 * mu * x) ** -3 * (1 + 2 * mu**2 * x**2) ** sp.Rational(3, 2)
    expr = sp.Rational(4, 3) * mu**3 * kp_m3 * (kp2 * K - (2 - kp2) * E)
    top = 2 * order - 3
    ser = sp.expand(sp.series(expr * x**3, x, 0, top + 4).removeO())
    out = {}
    for (px, r), c in sp.Poly(ser, x, ell).terms():
        out[(px - 3, r)] = sp.simplify(c)
    return mu, out, top


def quartic_large_v_expansion(lam: float, order: int = 2) -> QuarticLargeVSeries:
    """Large-v expansion of the quartic elliptic closed form at fixed lam.

    ``order`` n keeps K through k'^(2n-2) and E through k'^(2n); order 2 is
    the printed truncation (remainder O(v^(-3/2) log v)).  Terms carry powers
    v^(3/2 - n) and v^(-1/2 - n) log v; the v^(1/2) and v^(1/2) log v
    coefficients vanish identically, which is asserted.
    """
    if order < 1 or order > MAX_LARGE_V_ORDER:
        raise DomainError(f"order must lie in [1, {MAX_LARGE_V_ORDER}]")
    if not lam > 0:
        raise DomainError("expansion needs lam > 0")
    import sympy as sp

    mu, coeffs, top = _symbolic_large_v(order)
    for key in ((-1, 0), (-1, 1)):
        if key in coeffs and sp.simplify(coeffs[key]) != 0:
            raise NumericalError("v^(1/2) terms failed to cancel")
    muv = lam**0.25

    def build(cs, lo, hi):
        out = []
        for (px, r), c in sorted(cs.items()):
            if lo <= px <= hi:
                val = float(c.subs(mu, muv))
                if val != 0.0:
                    out.append((Fraction(-px, 2), r, val))
        return tuple(out)

    terms = build(coeffs, -10**6, top)
    # some orders add nothing new (the v^(-3/2) coefficients vanish), so
    # go deeper until the first non-zero omitted terms appear
    omitted = ()
    for nxt in range(order + 1, MAX_LARGE_V_ORDER + 2):
        _, coeffs_next, top_next = _symbolic_large_v(nxt)
        omitted = build(coeffs_next, top + 1, top_next)
        if omitted:
            break
    return QuarticLargeVSeries(lam, order, terms, omitted)
