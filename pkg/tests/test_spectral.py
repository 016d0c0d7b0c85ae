import cmath
import math

import mpmath
import numpy as np
import pytest
from scipy.optimize import brentq

from wkbdet.actions import TrinomialMomentum as T, action_quartic
from wkbdet.errors import DomainError, SectorError
from wkbdet.spectral import (
    KAPPA,
    Parity,
    canonical_action,
    coupling_rescale_log_factor,
    det_complex,
    det_entire,
    eigenvalues,
    harmonic_det,
    harmonic_levels,
    harmonic_log_det,
    log_det,
    recalibrate,
    recessive_solution,
    sector_theta,
    symanzik_rescale,
    zeta,
)

QUARTIC = T(4, 0, 1.0, 0.0, 0.0)
MIXED = T(4, 2, 1.0, 2.0, 0.0)


def hurwitz_sum(a, lam, s):
    # sum_k (4k + a + lam)^(-s), and its finite part at s = 1
    x = (a + lam) / 4
    if s == 1:
        return 0.25 * (-float(mpmath.digamma(x)) - math.log(4))
    return float(mpmath.zeta(s, x)) / 4**s


class TestParity:
    def test_coerce(self):
        assert Parity.coerce("+") is Parity.EVEN
        assert Parity.coerce(-1) is Parity.ODD
        assert Parity.coerce("odd") is Parity.ODD
        with pytest.raises(DomainError):
            Parity.coerce("sideways")


class TestEigenvalues:
    @pytest.mark.parametrize("v", [1.0, 2.5])
    def test_harmonic(self, v):
        for p in Parity:
            ev = eigenvalues(T(2, 0, v), p, 8).eigenvalues
            assert np.allclose(ev, harmonic_levels(p, 8, v), rtol=1e-10, atol=0)

    def test_pure_quartic(self):
        e = eigenvalues(QUARTIC, "even", 3).eigenvalues
        o = eigenvalues(QUARTIC, "odd", 3).eigenvalues
        assert abs(e[0] - 1.0603620905) < 1e-8
        assert abs(o[0] - 3.7996730298) < 1e-8

    def test_step_halving(self):
        tol = 1e-10
        a = eigenvalues(MIXED, "odd", 10, tol=tol, h0=0.02).eigenvalues
        b = eigenvalues(MIXED, "odd", 10, tol=tol, h0=0.01).eigenvalues
        assert np.max(np.abs(a - b) / np.maximum(1.0, b)) < tol / 4

    def test_interlacing(self):
        e = eigenvalues(MIXED, "even", 10).eigenvalues
        o = eigenvalues(MIXED, "odd", 10).eigenvalues
        assert np.all(e < o) and np.all(o[:-1] < e[1:])

    def test_count(self):
        with pytest.raises(DomainError):
            eigenvalues(QUARTIC, "even", 0)

    def test_harmonic_zeros(self):
        # boundary value of the recessive solution vanishes at -(4k+1), -(4k+3)
        for p, z in [(Parity.EVEN, -1.0), (Parity.EVEN, -5.0), (Parity.ODD, -3.0), (Parity.ODD, -7.0)]:
            def f(L):
                s = recessive_solution(T(2, 0, 1.0, 0.0, L), h0=0.005)
                return (s.dpsi0 if p is Parity.EVEN else s.psi0).real
            assert abs(brentq(f, z - 0.5, z + 0.5, xtol=1e-13) - z) < 1e-7


class TestZeta:
    def test_origin_quartic(self):
        for p in Parity:
            assert zeta(MIXED, p, 0)[0] == pytest.approx(0.25 * p.sign, abs=1e-15)

    def test_origin_harmonic(self):
        lam = 1.5
        for p in Parity:
            assert zeta(T(2, 0), p, 0, lam)[0] == pytest.approx(-lam / 4 + 0.25 * p.sign, abs=1e-15)

    @pytest.mark.parametrize("s", [1, 1.5, 2.5])
    @pytest.mark.parametrize("lam", [0.0, 1.0, 3.7])
    def test_harmonic_against_hurwitz(self, s, lam):
        for p, a in [(Parity.EVEN, 1), (Parity.ODD, 3)]:
            z, err = zeta(T(2, 0), p, s, lam)
            assert abs(z - hurwitz_sum(a, lam, s)) < max(err, 1e-13)

    def test_abscissa(self):
        with pytest.raises(DomainError):
            zeta(MIXED, "even", 0.7)

    def test_tail_budget(self):
        for p in Parity:
            z1, e1 = zeta(MIXED, p, 1, 0.8, count=40)
            z2, e2 = zeta(MIXED, p, 1, 0.8, count=60)
            assert abs(z1 - z2) < e1


class TestHarmonicDeterminant:
    @pytest.mark.parametrize("lam", [0.0, 0.5, 1.0, 2.0])
    def test_log_det_closed_form(self, lam):
        m = T(2, 0)
        for p in Parity:
            d = log_det(m, p, lam)
            assert abs(d.log_value - harmonic_log_det(p, lam)) < 1e-8

    def test_closed_form_values(self):
        # D2+(0) = 2 sqrt(pi)/Gamma(1/4), D2-(0) = sqrt(pi)/Gamma(3/4)
        assert harmonic_det("even", 0).real == pytest.approx(2 * math.sqrt(math.pi) / math.gamma(0.25))
        assert harmonic_det("odd", 0).real == pytest.approx(math.sqrt(math.pi) / math.gamma(0.75))

    def test_closed_form_zeros(self):
        for k in range(4):
            assert harmonic_det("even", -(4 * k + 1)) == 0
            assert harmonic_det("odd", -(4 * k + 3)) == 0

    def test_complex_lambda(self):
        for p in Parity:
            d = det_complex(T(2, 0, 1.0, 0.0, 1 + 1j), p)
            assert abs(d.value - harmonic_det(p, 1 + 1j)) < 1e-8

    def test_recalibrate(self):
        k = recalibrate()
        for p in Parity:
            assert abs(k[p] - KAPPA[p]) < 1e-9


class TestQuarticDeterminants:
    @pytest.mark.parametrize("lam", [0.0, 1.3, 5.0])
    def test_entire_matches_log_det(self, lam):
        for p in Parity:
            a = det_entire(MIXED, p, lam)
            b = log_det(MIXED, p, lam)
            assert abs(a.log_value - b.log_value) < 1e-7

    def test_recessive_matches_entire(self):
        lam = 0.7
        for p in Parity:
            a = det_complex(MIXED.with_(lam=lam), p)
            b = det_entire(MIXED, p, lam)
            assert abs(a.log_value - b.log_value) < 1e-6

    def test_conjugate_symmetry(self):
        z = 1.5 + 2.0j
        for p in Parity:
            a = det_entire(MIXED, p, z).value
            b = det_entire(MIXED, p, z.conjugate()).value
            assert abs(a - b.conjugate()) < 1e-12 * abs(a)

    def test_zero_at_spectrum(self):
        lam0 = eigenvalues(MIXED, "odd", 60, tol=1e-11).eigenvalues[0]
        assert det_entire(MIXED, "odd", -lam0).value == 0

    def test_needs_quartic(self):
        with pytest.raises(DomainError):
            det_entire(T(2, 0), "even", 1.0)

    def test_log_det_domain(self):
        with pytest.raises(DomainError):
            log_det(MIXED, "even", -1.0)

    def test_classical_part_decays(self):
        lams = [20.0, 80.0, 320.0]
        s, d = [], []
        for lam in lams:
            lp = log_det(QUARTIC, "even", lam).log_value.real
            lm = log_det(QUARTIC, "odd", lam).log_value.real
            s.append(abs(lp + lm - 2 * action_quartic(0.0, lam).value))
            d.append(abs(lp - lm - 0.5 * math.log(lam)))
        # both remainders fall off like a power of lam
        assert s[0] > s[1] > s[2] and s[2] < 0.5 * s[1]
        assert d[0] > d[1] > d[2] and d[2] < 0.5 * d[1]


class TestScaling:
    def test_identity_scale(self):
        m = T(4, 2, 1.0, 2.0, 1.0)
        scaled, f = symanzik_rescale(m, 1.0)
        assert scaled == m and all(v == 0 for v in f.values())

    @pytest.mark.parametrize("v,lam", [(4.0, 2.0), (9.0, 1.0)])
    def test_harmonic_coupling(self, v, lam):
        for p in Parity:
            lhs = log_det(T(2, 0, v), p, lam).log_value
            rhs = coupling_rescale_log_factor(2, v, lam, p) + harmonic_log_det(p, lam / math.sqrt(v))
            assert abs(lhs - rhs) < 1e-8

    def test_symanzik_consistency(self):
        m = T(2, 0, 4.0, 0.0, 2.0)
        scaled, f = symanzik_rescale(m)
        assert scaled.u == pytest.approx(1.0)
        for p in Parity:
            lhs = log_det(m, p).log_value
            rhs = log_det(scaled, p).log_value + f[p]
            assert abs(lhs - rhs) < 1e-8

    def test_quartic_coupling_without_anomaly(self):
        v, lam = 3.0, 1.0
        for p in Parity:
            lhs = log_det(T(4, 0, v), p, lam).log_value
            rhs = coupling_rescale_log_factor(4, v, lam, p) + log_det(QUARTIC, p, v ** (-1 / 3) * lam).log_value
            assert abs(lhs - rhs) < 1e-8


class TestSector:
    def test_theta(self):
        assert sector_theta(4, 2) == pytest.approx(2 * math.pi / 3)

    def test_violation(self):
        v = 2.0 * cmath.exp(1j * (2 * math.pi / 3 + 0.1))
        with pytest.raises(SectorError):
            det_complex(T(4, 2, 1.0, v, 0.5), "even")

    def test_canonical_action_dispatch(self):
        assert canonical_action(T(4, 2, 1.0, 5.0, 0.5)) == action_quartic(5.0, 0.5).value
