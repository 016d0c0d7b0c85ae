"""Conjugate problems, the bilinear Wronskian relation and large-v limits.

The first conjugate of -d^2/dq^2 + q^N + v q^M + lam rotates
q -> e^(-i phi_N/2) q with phi_N = 4 pi/(N+2), giving the parameters
lam1 = e^(-i phi_N) lam and v1 = e^(i pi/j) v, j = (N+2)/(2(N-M)).
The parity determinants of a problem and its conjugate obey

    e^(i phi_N/4) D+[1] D- - e^(-i phi_N/4) D+ D-[1] = 2i e^(i phi_N b/2)

with b the q^-1 coefficient of the large-q momentum.  Everything here
reduces to evaluations of the spectral module.
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .actions import TrinomialMomentum, action_binomial
from .errors import DomainError, NumericalError
from .specfun import gamma
from .spectral import Parity, det_complex, det_entire, harmonic_det
from .spectral.recessive import sector_theta
from .spectral.spectrum import _threads
from .spectral.zeta import residue

__all__ = [
    "ConjugateProblem",
    "conjugate_params",
    "conjugate_angle",
    "conjugate_orbit",
    "WronskianTerms",
    "wronskian_terms",
    "wronskian_residual",
    "LargeVFactorization",
    "anomaly_exponent",
    "large_v_factorization",
    "sector_theta",
    "InstantonAction",
    "instanton_action",
    "limit_relation_residual",
    "phase_identities",
    "TransitionReport",
    "transition_audit",
    "DEFAULT_LADDER",
]

DEFAULT_LADDER = (5.0, 10.0, 20.0, 40.0, 80.0)
CONVERGENCE_RATIO = 0.6


def _check_nm(N: int, M: int, allow_equal: bool = False) -> None:
    if N % 2 or M % 2:
        raise DomainError("N and M must be even")
    if not (0 <= M < N or (allow_equal and M == N)) or N < 2:
        raise DomainError(f"need N > M >= 0, got N={N}, M={M}")


def conjugate_angle(N: int) -> float:
    """phi_N = 4 pi/(N+2)."""
    return 4.0 * math.pi / (N + 2)


def _j(N: int, M: int) -> Fraction:
    return Fraction(N + 2, 2 * (N - M))


@dataclass(frozen=True)
class ConjugateProblem:
    N: int
    M: int
    phi_N: float
    lambda1: complex
    v1: complex
    Lambda: complex
    Lambda1: complex
    z: complex
    arg_v1: float = 0.0   # continuous argument arg v + pi/j


def _pow_arg(r: float, arg: float, p: float) -> complex:
    # (r e^{i arg})^p on the branch fixed by arg
    if r == 0:
        return 0j
    return r**p * cmath.exp(1j * p * arg)


def conjugate_params(N: int, M: int, lam, v, *, arg_v: float | None = None) -> ConjugateProblem:
    """Parameters of the first conjugate problem.

    Lambda1 is formed both from (lam1, v1) and as e^(-i phi_M) Lambda and
    the two must agree; ``arg_v`` fixes the branch of v when it is not the
    principal one.
    """
    _check_nm(N, M)
    if M == 0:
        raise DomainError("the conjugate Lambda needs M >= 2")
    lam, v = complex(lam), complex(v)
    phi_N = conjugate_angle(N)
    phi_M = conjugate_angle(M)
    j = float(_j(N, M))
    a = cmath.phase(v) if arg_v is None else float(arg_v)
    a1 = a + math.pi / j
    lam1 = cmath.exp(-1j * phi_N) * lam
    v1 = abs(v) * cmath.exp(1j * a1)
    if v == 0:
        raise DomainError("Lambda = v^(-2/(M+2)) lam needs v != 0")
    p = -2.0 / (M + 2)
    Lam = _pow_arg(abs(v), a, p) * lam
    Lam1 = _pow_arg(abs(v), a1, p) * lam1
    alt = cmath.exp(-1j * phi_M) * Lam
    if abs(Lam1 - alt) > 1e-12 * max(1.0, abs(Lam)):
        raise NumericalError("rotated Lambda disagrees with e^(-i phi_M) Lambda")
    z = cmath.exp(1j * phi_N / 4) * cmath.exp(1j * (a1 - a) / (2 * (M + 2)))
    return ConjugateProblem(N, M, phi_N, lam1, v1, Lam, Lam1, z, a1)


def conjugate_orbit(N: int, M: int, lam, v, times: int) -> tuple[complex, complex]:
    """Apply the conjugate transform ``times`` times to (lam, v)."""
    phi_N = conjugate_angle(N)
    j = float(_j(N, M))
    lam = complex(lam) * cmath.exp(-1j * phi_N * times)
    v = complex(v) * cmath.exp(1j * math.pi / j * times)
    return lam, v


# -- Wronskian relation ------------------------------------------------------


@dataclass(frozen=True)
class WronskianTerms:
    residual: complex
    lhs: complex
    rhs: complex
    error_budget: float
    dets: dict = field(default_factory=dict, compare=False)

    @property
    def relative(self) -> float:
        return abs(self.residual) / abs(self.rhs)


def _rhs(N: int, M: int, lam, v) -> complex:
    b = residue(TrinomialMomentum(N, M, 1.0, v, lam)) if M < N else 0j
    return 2j * cmath.exp(1j * conjugate_angle(N) * b / 2)


def _harmonic_terms(lam, v) -> WronskianTerms:
    # -d^2 + v q^2 + lam, read in units where the q^2 coefficient is 1
    v = complex(v)
    Lam = complex(lam) / cmath.sqrt(v) if v != 1 else complex(lam)
    res = limit_relation_residual(2, Lam)
    rhs = 2j * cmath.exp(1j * math.pi * Lam / 4)
    return WronskianTerms(res, res + rhs, rhs, 1e-14 * abs(rhs))


def wronskian_terms(N: int, M: int, lam, v=0.0, *, tol: float = 1e-9, h0: float | None = None,
                    probe_beyond: bool = False) -> WronskianTerms:
    """Both sides of the bilinear relation at (lam, v).

    All four determinants come from the recessive solution (the conjugate
    point has complex parameters).  N = M = 2 is the pure harmonic case
    and uses the Gamma closed forms.
    """
    if N == M == 2:
        return _harmonic_terms(lam, v if complex(v) != 0 else 1.0)
    _check_nm(N, M)
    lam, v = complex(lam), complex(v)
    phi_N = conjugate_angle(N)
    lam1, v1 = conjugate_orbit(N, M, lam, v, 1)
    m = TrinomialMomentum(N, M, 1.0, v, lam)
    m1 = TrinomialMomentum(N, M, 1.0, v1, lam1)
    kw = dict(tol=tol, h0=h0, probe_beyond=probe_beyond)
    jobs = [(m, Parity.EVEN), (m, Parity.ODD), (m1, Parity.EVEN), (m1, Parity.ODD)]
    with ThreadPoolExecutor(max(1, min(4, _threads()))) as pool:
        dp, dm, dp1, dm1 = pool.map(lambda a: det_complex(a[0], a[1], **kw), jobs)
    t1 = cmath.exp(1j * phi_N / 4) * dp1.value * dm.value
    t2 = cmath.exp(-1j * phi_N / 4) * dp.value * dm1.value
    lhs = t1 - t2
    rhs = _rhs(N, M, lam, v)
    budget = abs(t1) * (dp1.error_estimate + dm.error_estimate) \
        + abs(t2) * (dp.error_estimate + dm1.error_estimate)
    return WronskianTerms(lhs - rhs, lhs, rhs, budget,
                          {"D+": dp.value, "D-": dm.value, "D+[1]": dp1.value, "D-[1]": dm1.value,
                           "t1": t1, "t2": t2})


def wronskian_residual(N: int, M: int, lam, v=0.0, **kw) -> complex:
    """e^(i phi/4) D+[1] D- - e^(-i phi/4) D+ D-[1] - 2i e^(i phi b/2)."""
    return wronskian_terms(N, M, lam, v, **kw).residual


# -- large-v factorisation ---------------------------------------------------


def anomaly_exponent(N: int, M: int, lam, v) -> complex:
    """A(lam, v) = [(N+2) log v + 4N log 2] Lambda / (8(N-2)) for M = 2, else 0."""
    if M != 2:
        return 0j
    v = complex(v)
    Lam = complex(lam) / cmath.sqrt(v)
    return ((N + 2) * cmath.log(v) + 4 * N * math.log(2)) * Lam / (8 * (N - 2))


def _base_det(M: int, parity: Parity, Lam: complex) -> complex:
    """D_M+/-(Lam) of -d^2 + q^M + Lam."""
    if M == 2:
        return harmonic_det(parity, Lam)
    return det_entire(TrinomialMomentum(M, 0, 1.0, 0.0, 0.0), parity, Lam).value


@dataclass(frozen=True)
class LargeVFactorization:
    predicted: dict
    computed: dict
    ratio: dict
    Lambda: complex
    action: complex
    anomaly: complex


def large_v_factorization(N: int, M: int, lam, v, *, tol: float = 1e-9,
                          probe_beyond: bool = False) -> LargeVFactorization:
    """Compare D_N+/-(lam, v) with e^(I(v) + A) v^(+/-1/(2(M+2))) D_M+/-(Lambda)."""
    _check_nm(N, M)
    if M < 2:
        raise DomainError("large-v factorisation needs M >= 2")
    lam, v = complex(lam), complex(v)
    if v == 0:
        raise DomainError("v must be non-zero")
    if N == 2:
        raise DomainError("need N > 2")
    Lam = v ** (-2.0 / (M + 2)) * lam
    I = complex(action_binomial(1.0, v, N, M).value)
    A = anomaly_exponent(N, M, lam, v)
    m = TrinomialMomentum(N, M, 1.0, v, lam)
    pred, comp, ratio = {}, {}, {}
    for parity in Parity:
        logp = I + A + parity.sign * cmath.log(v) / (2 * (M + 2)) \
            + cmath.log(_base_det(M, parity, Lam))
        d = det_complex(m, parity, tol=tol, probe_beyond=probe_beyond)
        pred[parity] = cmath.exp(logp)
        comp[parity] = d.value
        ratio[parity] = cmath.exp(d.log_value - logp)
    return LargeVFactorization(pred, comp, ratio, Lam, I, A)


# -- instanton action and the sector angle ------------------------------------


@dataclass(frozen=True)
class InstantonAction:
    value: complex
    q0: complex
    reality_angle: float


def instanton_action(N: int, M: int, v) -> InstantonAction:
    """int_0^q0 (q^N + v q^M)^(1/2) dq from the double point 0 to q0.

    q0 = e^(-i pi/(N-M)) v^(1/(N-M)) is the first outer turning point.  The
    action is real first at arg v = (M+2) pi/(N+2) = Theta.
    """
    if N <= M or N < 2:
        raise DomainError("need N > M")
    v = complex(v)
    d = N - M
    r, a = abs(v), cmath.phase(v)
    coef = math.sqrt(math.pi) / (N + 2) * (gamma((M + 2) / (2 * d)) / gamma((N + 2) / (2 * d))).real
    value = coef * r ** ((N + 2) / (2 * d)) * cmath.exp(1j * (-(M + 2) * math.pi + (N + 2) * a) / (2 * d))
    q0 = cmath.exp(-1j * math.pi / d) * _pow_arg(r, a, 1.0 / d)
    # Im vanishes when (N+2) arg v = (M+2) pi (mod 2 d pi); smallest positive root
    angle = (M + 2) * math.pi / (N + 2)
    if abs(angle - sector_theta(N, M)) > 1e-15:
        raise NumericalError("reality angle disagrees with the sector angle")
    return InstantonAction(value, q0, angle)


# -- the M-problem limit relation ---------------------------------------------


def limit_relation_residual(M: int, Lam) -> complex:
    """e^(i phi_M/4) D+(e^(-i phi_M) Lam) D-(Lam) - e^(-i phi_M/4) D+(Lam) D-(e^(-i phi_M) Lam)
    - 2i e^(delta_{M,2} i pi Lam/4) for -d^2 + q^M + Lam."""
    if M < 2 or M % 2:
        raise DomainError("M must be even and >= 2")
    Lam = complex(Lam)
    phi = conjugate_angle(M)
    Lam1 = cmath.exp(-1j * phi) * Lam
    D = lambda p, x: _base_det(M, p, x)
    lhs = cmath.exp(1j * phi / 4) * D(Parity.EVEN, Lam1) * D(Parity.ODD, Lam) \
        - cmath.exp(-1j * phi / 4) * D(Parity.EVEN, Lam) * D(Parity.ODD, Lam1)
    rhs = 2j * (cmath.exp(1j * math.pi * Lam / 4) if M == 2 else 1.0)
    return lhs - rhs


# -- the v -> infinity transition ----------------------------------------------


def phase_identities(N: int, M: int) -> dict:
    """The closed phase identities of the v -> infinity limit, in exact arithmetic.

    Works with sympy on symbols for log|v|, |v| and Lambda, so that the
    angles are rational multiples of pi.  Returns name -> bool.
    """
    import sympy as sp

    _check_nm(N, M)
    pi, I = sp.pi, sp.I
    r, L = sp.symbols("r Lambda", positive=True)
    j = sp.Rational(N + 2, 2 * (N - M))
    phi_N = 4 * pi / (N + 2)
    phi_M = 4 * pi / (M + 2)
    a = -pi / (2 * j)          # arg v on the audit ray
    a1 = a + pi / j
    out = {}
    # z = e^{i phi_N/4} (v1/v)^{1/(2(M+2))} equals e^{i phi_M/4}
    out["z"] = sp.simplify(phi_N / 4 + (a1 - a) / (2 * (M + 2)) - phi_M / 4) == 0
    # I(v) + I(v1) = i phi_N b/2 with b the q^-1 residue of the binomial
    logv = sp.log(r) + I * a
    logv1 = sp.log(r) + I * a1
    if j.q != 1:
        # I(v) = C v^j with a real C
        C = sp.Symbol("C", real=True)
        s = C * r**j * (sp.exp(I * j * a) + sp.exp(I * j * a1))
        out["action"] = sp.simplify(s) == 0
    else:
        ji = int(j)
        bcoef = sp.binomial(sp.Rational(1, 2), ji)
        b = bcoef * r**ji * sp.exp(I * ji * a)
        b1 = bcoef * r**ji * sp.exp(I * ji * a1)
        K = sp.Symbol("K")
        Iv = -2 * ji * b / (N + 2) * (logv - K)
        Iv1 = -2 * ji * b1 / (N + 2) * (logv1 - K)
        out["action"] = sp.simplify(sp.expand(Iv + Iv1 - I * phi_N * b / 2)) == 0
    if M == 2:
        Lam = L * sp.exp(-I * a / 2)
        Lam1 = sp.exp(-I * phi_M) * Lam
        A = ((N + 2) * logv + 4 * N * sp.log(2)) * Lam / (8 * (N - 2))
        A1 = ((N + 2) * logv1 + 4 * N * sp.log(2)) * Lam1 / (8 * (N - 2))
        out["anomaly"] = sp.simplify(sp.expand(A + A1 + I * pi * Lam / 4)) == 0
    return out


@dataclass(frozen=True)
class TransitionReport:
    """Outcome of :func:`transition_audit`.

    ``deviations`` measure each bilinear product against its large-v
    factorised form and carry the convergence test.  ``bracket_deviations``
    compare the reduced left side with its limit; once the phase
    identities hold these agree for every |v| and only show round-off.
    """
    N: int
    M: int
    lam: complex
    ladder: tuple
    brackets: list
    targets: list
    deviations: list
    ratios: list
    converged: bool
    identities: dict
    bracket_deviations: list = field(default_factory=list)


def transition_audit(N: int, M: int, lam, ladder=DEFAULT_LADDER, *, tol: float = 1e-9) -> TransitionReport:
    """Follow the Wronskian left side along arg v = -pi/(2j) as |v| grows.

    After dividing out e^(I(v) + I(v1) + A + A1) the left side should
    approach z D_M+(Lambda1) D_M-(Lambda) - z^-1 D_M+(Lambda) D_M-(Lambda1).
    Convergence is declared when the deviation of each product from its
    limiting form shrinks by a factor below 0.6 per ladder step.  Refuses
    j <= 1, where both rays do not fit in the sector.
    """
    _check_nm(N, M)
    if M < 2:
        raise DomainError("the transition needs M >= 2")
    j = _j(N, M)
    if j <= 1:
        raise DomainError(f"transition audit needs j > 1 (2M + 2 > N); j = {j}")
    lam = complex(lam)
    arg = -math.pi / (2 * float(j))

    def point(r):
        v = r * cmath.exp(1j * arg)
        cp = conjugate_params(N, M, lam, v)
        w = wronskian_terms(N, M, lam, v, tol=tol)
        I = action_binomial(1.0, v, N, M).value + action_binomial(1.0, cp.v1, N, M).value
        A = anomaly_exponent(N, M, lam, v) + anomaly_exponent(N, M, cp.lambda1, cp.v1)
        scale = cmath.exp(-(I + A))
        # the v^(+/-1/(2(M+2))) factors belong to z
        z = cp.z
        D = lambda p, x: _base_det(M, p, x)
        p1 = z * D(Parity.EVEN, cp.Lambda1) * D(Parity.ODD, cp.Lambda)
        p2 = D(Parity.EVEN, cp.Lambda) * D(Parity.ODD, cp.Lambda1) / z
        dev = max(abs(w.dets["t1"] * scale / p1 - 1), abs(w.dets["t2"] * scale / p2 - 1))
        return w.lhs * scale, p1 - p2, dev

    with ThreadPoolExecutor(max(1, min(len(ladder), _threads()))) as pool:
        res = list(pool.map(point, ladder))
    brackets = [b for b, _, _ in res]
    targets = [t for _, t, _ in res]
    dev = [d for _, _, d in res]
    ratios = [dev[k + 1] / dev[k] if dev[k] > 0 else 0.0 for k in range(len(dev) - 1)]
    converged = bool(ratios) and all(q < CONVERGENCE_RATIO for q in ratios)
    ident = phase_identities(N, M)
    cp = conjugate_params(N, M, lam, ladder[0] * cmath.exp(1j * arg))
    ident["z_numeric"] = abs(cp.z - cmath.exp(1j * conjugate_angle(M) / 4)) < 1e-14
    return TransitionReport(N, M, lam, tuple(ladder), brackets, targets, dev, ratios, converged,
                            ident, [abs(b - t) for b, t in zip(brackets, targets)])
