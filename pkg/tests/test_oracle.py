"""Self-consistency of the shooting-method Green's function and the
extended-precision references."""
import math

import numpy as np
import pytest

from magres2d.oracle import (ode_green, regular_solution, series_reference,
                             channel_solution, OracleError)
from magres2d.specfun import bessel


class TestOdeGreen:
    def test_symmetry(self):
        v1 = ode_green(1, 0.3, 0.05, 0.7, 1.8)
        v2 = ode_green(1, 0.3, 0.05, 1.8, 0.7)
        assert abs(v1 - v2) <= 1e-7 * abs(v1)

    def test_matches_closed_form_negative(self):
        from magres2d import refop as R
        cl = R.channel_kernel(0, R.spectral_point(0.3, -0.04), 0.7, 1.8).value
        od = ode_green(0, 0.3, -0.04, 0.7, 1.8)
        assert abs(cl - od) <= 1e-6 * abs(cl)

    def test_free_case(self):
        val = ode_green(0, 0.0, 1.0, 0.7, 1.8)
        sl = 1.0
        free = (1j * math.pi / 2.0) * bessel("J", 0, sl * 0.7).value * (
            bessel("J", 0, sl * 1.8).value + 1j * bessel("Y", 0, sl * 1.8).value)
        assert abs(val - free) <= 1e-7 * abs(free)

    def test_domain_guards(self):
        with pytest.raises(OracleError):
            ode_green(0, 0.3, 0.05 - 1e-3j, 0.7, 1.8)
        with pytest.raises(OracleError):
            ode_green(0, 0.3, 1e-10, 0.7, 1.8)

    def test_regular_solution_residual(self):
        # substitute the integrated solution back into the radial equation
        # away from the matching radius (3-point finite differences)
        m, alpha, lam = 1, 0.3, 0.05 + 0.0j
        h = 1e-3
        for r0 in (0.4, 0.7, 1.9, 3.3):
            grid = np.array([r0 - h, r0, r0 + h])
            sol = regular_solution(m, alpha, lam, grid)
            d2 = (sol.f[2] - 2.0 * sol.f[1] + sol.f[0]) / h ** 2
            a0 = alpha if r0 < 1 else alpha / r0
            pot = (m / r0 + a0) ** 2 - 0.25 / r0 ** 2
            resid = -d2 + (pot - lam) * sol.f[1]
            assert abs(resid) <= 1e-5 * max(abs(d2), abs(sol.f[1]), 1e-30)

    def test_frobenius_small_r(self):
        sol = regular_solution(2, 0.3, 0.05, np.array([1e-3, 2e-3]))
        assert abs(sol.f[1] / sol.f[0]) == pytest.approx(2.0 ** 2.5, rel=1e-3)

    def test_wronskian_not_resonant(self):
        cs = channel_solution(0, 0.3, -0.5, [0.5, 1.5])
        assert abs(cs.wronskian) > 1e-12


class TestSeriesReference:
    def test_kummer_m_digits(self):
        ref = series_reference("kummer_m", a=0.5, b=2, z=1)
        assert float(ref) == pytest.approx(1.3281918274866849, rel=1e-15)

    def test_bessel_j(self):
        ref = float(series_reference("bessel_j_series", nu=0.3, z=2, terms=60))
        assert ref == pytest.approx(0.42569406198141372, rel=1e-14)

    def test_gamma_integral(self):
        ref = float(series_reference("gamma_integral", x=0.3))
        assert ref == pytest.approx(2.9915689876874207, rel=1e-13)


class TestAgreementMatrix:
    """Closed form vs oracle over the full (m, lambda, pairs) matrix at one
    flux; the three-flux version runs in the acceptance suite."""

    PAIRS = [(0.7, 1.8), (0.4, 2.5), (1.2, 3.0), (0.5, 1.1)]

    @pytest.mark.parametrize("lam", [-1.0, -0.04, 0.05, 1.0])
    def test_alpha_03(self, lam):
        from magres2d import refop as R
        alpha = 0.3
        for m in range(-3, 4):
            pt = R.spectral_point(alpha, lam)
            for (r, rp) in self.PAIRS:
                cl = R.channel_kernel(m, pt, r, rp).value
                od = ode_green(m, alpha, lam, r, rp)
                assert abs(cl - od) <= 1e-6 * abs(od), (m, lam, r, rp)
