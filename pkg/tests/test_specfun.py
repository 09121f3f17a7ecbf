"""Special-function evaluators against classical identities and the
extended-precision series / quadrature oracles."""
import math

import numpy as np
import pytest

from magres2d.specfun import (
    gamma, bessel, bessel_array, bessel_derivative,
    kummer_m, kummer_u, kummer_derivatives,
    DomainError,
)
from magres2d.oracle import series_reference
from magres2d.quadrature import gauss_legendre

EULER_GAMMA = 0.5772156649015329


class TestGamma:
    def test_gamma_one(self):
        assert gamma(1.0) == pytest.approx(1.0, rel=1e-13)

    def test_gamma_half(self):
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)

    def test_gamma_7p3_vs_quadrature_oracle(self):
        # Gamma(7.3) = 6.3*5.3*...*0.3 * Gamma(0.3), Gamma(0.3) by the
        # integral oracle; frozen: 1271.4236336638366538
        ref = float(series_reference("gamma_integral", x=0.3))
        for k in range(7):
            ref *= 0.3 + k
        assert ref == pytest.approx(1271.4236336638366538, rel=1e-12)
        assert gamma(7.3) == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("x", [-1.0, 0.0, 60.5, 1e9])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            gamma(x)

    def test_recursion_sweep(self):
        for x in np.linspace(0.05, 29.0, 57):
            assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=5e-13)


class TestBessel:
    def test_j0_at_zero_limit(self):
        assert bessel("J", 0.0, 1e-8).value.real == pytest.approx(1.0, abs=1e-12)

    def test_wronskian_jy_at_one(self):
        # J_{1.3} Y_{0.3} - Y_{1.3} J_{0.3} at z=1 equals 2/pi
        z = 1.0
        w = (bessel("J", 1.3, z).value * bessel("Y", 0.3, z).value
             - bessel("Y", 1.3, z).value * bessel("J", 0.3, z).value)
        assert w.real == pytest.approx(2.0 / math.pi, rel=1e-11)

    def test_small_argument_power_law(self):
        val = bessel("J", 0.3, 0.01).value.real
        assert val == pytest.approx(0.005 ** 0.3 / gamma(1.3), rel=1e-4)

    def test_k0_log_limit(self):
        val = bessel("K", 0.0, 0.05).value.real
        assert val == pytest.approx(-math.log(0.05) - EULER_GAMMA + math.log(2.0), abs=5e-2)

    def test_ik_product_bound(self):
        prod = bessel("I", 2.7, 3.1).value.real * bessel("K", 1.7, 3.1).value.real
        assert prod <= 1.0 / (2.0 * 1.7)

    def test_j_vs_series_oracle(self):
        ref = float(series_reference("bessel_j_series", nu=0.3, z=2, terms=60))
        assert bessel("J", 0.3, 2.0).value.real == pytest.approx(ref, rel=1e-12)
        assert ref == pytest.approx(0.42569406198141372, rel=1e-13)

    @pytest.mark.parametrize("kind,nu", [("J", 70.0), ("Y", -0.5), ("K", -1.0)])
    def test_order_domain(self, kind, nu):
        with pytest.raises(DomainError):
            bessel(kind, nu, 1.0)


class TestBesselDerivative:
    def test_j0_prime(self):
        d = bessel_derivative("J", 0.0, 2.0).value.real
        assert d == pytest.approx(-bessel("J", 1.0, 2.0).value.real, rel=1e-12)

    def test_i_recurrence_identity(self):
        nu, z = 0.7, 1.5
        lhs = bessel_derivative("I", nu, z).value.real
        rhs = bessel("I", nu + 1.0, z).value.real + (nu / z) * bessel("I", nu, z).value.real
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_finite_difference(self):
        h = 1e-3
        fd = (bessel("J", 0.3, 1.0 + h).value.real
              - bessel("J", 0.3, 1.0 - h).value.real) / (2.0 * h)
        assert bessel_derivative("J", 0.3, 1.0).value.real == pytest.approx(fd, rel=1e-6)


class TestBesselInvariants:
    NUS = np.linspace(0.0, 10.5, 8)
    ZS = np.geomspace(0.1, 50.0, 9)

    def test_wronskian_jy(self):
        for nu in self.NUS:
            j0, _ = bessel_array("J", nu, self.ZS)
            j1, _ = bessel_array("J", nu + 1.0, self.ZS)
            y0, _ = bessel_array("Y", nu, self.ZS)
            y1, _ = bessel_array("Y", nu + 1.0, self.ZS)
            target = 2.0 / (math.pi * self.ZS)
            assert np.all(np.abs(j1 * y0 - y1 * j0 - target) <= 1e-10 * target)

    def test_wronskian_ik(self):
        for nu in self.NUS:
            i0, _ = bessel_array("I", nu, self.ZS)
            i1, _ = bessel_array("I", nu + 1.0, self.ZS)
            k0, _ = bessel_array("K", nu, self.ZS)
            k1, _ = bessel_array("K", nu + 1.0, self.ZS)
            target = 1.0 / self.ZS
            assert np.all(np.abs(k1 * i0 + k0 * i1 - target) <= 1e-10 * target)

    def test_reflection_consistency(self):
        # sin(nu pi) Y_nu + J_{-nu} - cos(nu pi) J_nu = 0; checked where the
        # terms are O(1) so the absolute 1e-9 budget is meaningful
        for nu in (0.3, 2.6, 7.5, 10.2):
            for z in (12.0, 40.0, 64.0, 100.0):
                res = (math.sin(math.pi * nu) * bessel("Y", nu, z).value
                       + bessel("J", -nu, z).value
                       - math.cos(math.pi * nu) * bessel("J", nu, z).value)
                assert abs(res) < 1e-9

    @pytest.mark.parametrize("nu", [0.6, 1.5, 3.2])
    @pytest.mark.parametrize("j", [0, 1])
    def test_monotonicity(self, nu, j):
        z = np.geomspace(0.2, 60.0, 120)
        jj, _ = bessel_array("J", nu, z)
        yy, _ = bessel_array("Y", nu, z)
        g = z ** j * (yy * yy + jj * jj)
        assert np.all(np.diff(g) <= 1e-12 * np.abs(g[:-1]))

    def test_j_uniform_bound(self):
        for nu in (0.0, 0.4, 1.0, 3.7, 11.0, 25.0, 40.0):
            z = np.geomspace(1e-5, 100.0, 60)
            jj, _ = bessel_array("J", nu, z)
            assert np.all(np.abs(jj) <= 1.0 + 1e-12)

    def test_squared_integral_identity(self):
        # int_0^inf J_nu(at)^2 t^-beta dt against the closed Gamma-ratio form
        # for (nu, beta, a) = (1.3, 0.8, 1); numeric part on [0, T] by a
        # composite GK rule plus the analytic oscillatory-tail correction
        # from J_nu(t)^2 ~ (1 + sin(2t - nu pi)) / (pi t).
        nu, beta = 1.3, 0.8
        T = 200.0
        total = 0.0
        edges = np.linspace(0.0, T, 201)
        for a_, b_ in zip(edges[:-1], edges[1:]):
            x, w = gauss_legendre(15, a_, b_)
            jv, _ = bessel_array("J", nu, x)
            total += float(np.sum(w * jv * jv * x ** (-beta)))
        tail = (T ** (-beta) / beta + 0.5 * T ** (-1.0 - beta)
                * math.cos(2.0 * T - nu * math.pi)) / math.pi
        closed = 0.47153076658056220  # a^(b-1) G(b) G(nu+(1-b)/2) / (2^b G((1+b)/2)^2 G(nu+(1+b)/2))
        assert total + tail == pytest.approx(closed, rel=1e-6)


class TestKummer:
    def test_m_at_zero(self):
        for a, b in [(0.5, 1.0), (-2.3, 4.0), (1.5 + 2.0j, 3.0)]:
            assert kummer_m(a, b, 0.0).value == pytest.approx(1.0)

    def test_m_identity_e(self):
        # M(1,2,z) = (e^z - 1)/z, cross-checked against the 200-term
        # extended-precision series oracle
        ref = complex(series_reference("kummer_m", a=1, b=2, z=0.7))
        assert kummer_m(1.0, 2.0, 0.7).value == pytest.approx(ref, rel=1e-12)
        assert ref.real == pytest.approx((math.e ** 0.7 - 1.0) / 0.7, rel=1e-13)

    def test_m_band_bound(self):
        for m in range(-3, 4):
            for z in (0.5, 2.0):
                val = abs(kummer_m(0.5 + m + abs(m), 1 + 2 * abs(m), z).value)
                assert 1.0 <= val <= math.exp(z) * (1.0 + 1e-12)

    def test_u_upper_bound(self):
        a, b, z = 1.2, 3.0, 0.8
        lhs = gamma(a) * kummer_u(a, b, z).value.real
        assert lhs <= math.exp(z) * z ** (1.0 - b) * gamma(b - 1.0)

    def test_u_exponential_identity(self):
        # U(1,2,z) = 1/z; the quadrature oracle at tightened tolerance
        v = kummer_u(1.0, 2.0, 2.5, abs_tol=1e-14, rel_tol=1e-13)
        assert v.value.real == pytest.approx(1.0 / 2.5, rel=1e-11)

    def test_wronskian_w_xz(self):
        # v'u - v u' at r=1 for m=1, kappa=alpha=1, lambda=0 equals
        # Gamma(3)/Gamma(5/2) (prefactors of v,u cancel in the combination)
        m, alpha, kappa, r = 1, 1.0, 1.0, 1.0
        a = 0.5 + abs(m) + m * alpha / kappa
        b = 1 + 2 * abs(m)
        z = 2.0 * kappa * r
        pref = math.exp(-kappa * r) * z ** abs(m)
        mval = kummer_m(a, b, z).value
        uval = kummer_u(a, b, z).value
        dm, du = kummer_derivatives(a, b, z)
        v = pref * mval
        u = pref * uval
        dpref = (-kappa + abs(m) / r) * pref
        vp = dpref * mval + pref * 2.0 * kappa * dm.value
        up = dpref * uval + pref * 2.0 * kappa * du.value
        assert (vp * u - v * up).real == pytest.approx(gamma(3.0) / gamma(2.5), rel=1e-9)

    def test_nonconvergence_path(self):
        with pytest.raises(DomainError):
            kummer_m(1.0, -2.0, 1.0)


class TestKummerDerivatives:
    def test_dm_at_zero(self):
        a, b = 1.7, 3.1
        dm, _ = kummer_derivatives(a, b, 1e-14)
        assert dm.value.real == pytest.approx(a / b, rel=1e-10)

    def test_du_shift(self):
        dm, du = kummer_derivatives(1.5, 3.0, 2.0)
        assert du.value.real == pytest.approx(-1.5 * kummer_u(2.5, 4.0, 2.0).value.real,
                                              rel=1e-11)

    def test_finite_difference(self):
        a, b, z = 0.9, 2.4, 1.1
        h = 1e-4
        dm, du = kummer_derivatives(a, b, z)
        fdm = (kummer_m(a, b, z + h).value - kummer_m(a, b, z - h).value) / (2 * h)
        fdu = (kummer_u(a, b, z + h).value - kummer_u(a, b, z - h).value) / (2 * h)
        assert dm.value == pytest.approx(fdm, rel=1e-6)
        assert du.value == pytest.approx(fdu, rel=1e-6)
