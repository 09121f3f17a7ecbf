"""Channel kernels, matching coefficients and threshold formulas against the
ODE oracle, the free-resolvent closed form, and each other."""
import cmath
import math

import numpy as np
import pytest

from magres2d import refop as R
from magres2d.oracle import ode_green
from magres2d.specfun import bessel, gamma


def kernel(m, alpha, lam, r, rp, side=+1):
    return R.channel_kernel(m, R.spectral_point(alpha, lam, side), r, rp).value


class TestFluxParams:
    def test_basic(self):
        fp = R.flux_params(2.3)
        assert fp.mu == pytest.approx(0.3)
        assert fp.k_star == (-2,)
        assert not fp.integer_flux

    def test_integer(self):
        fp = R.flux_params(3.0)
        assert fp.mu == 0.0
        assert fp.integer_flux

    def test_tie(self):
        fp = R.flux_params(0.5)
        assert fp.mu == pytest.approx(0.5)
        assert fp.k_star == (-1, 0)
        with pytest.raises(R.UnsupportedRegimeError):
            fp.unique_k

    def test_negative(self):
        assert R.flux_params(-1.7).mu == pytest.approx(0.3)
        assert R.flux_params(-1.7).k_star == (2,)


class TestInteriorSolutions:
    def test_vanishing_at_origin(self):
        pt = R.spectral_point(0.3, 0.01)
        v, _, _, _ = R.interior_solutions(2, pt, 1e-6)
        assert abs(v) < 1e-10

    def test_wronskian_w_xz(self):
        # v'u - v u' at r=1 equals Gamma(1+2|m|)/Gamma(1/2+|m|+m a/kappa)
        m, alpha, lam = 1, 0.3, 0.01
        pt = R.spectral_point(alpha, lam)
        v, vp, u, up = R.interior_solutions(m, pt, 1.0)
        a = 0.5 + abs(m) + m * alpha / pt.kappa.real
        expected = gamma(1.0 + 2 * abs(m)) / gamma(a)
        assert (vp * u - v * up).real == pytest.approx(expected, rel=1e-9)

    def test_series_oracle_value(self):
        # v_2(0, 0.5) for alpha=1.7 against the extended-precision M series
        from magres2d.oracle import series_reference
        m, alpha, r = 2, 1.7, 0.5
        z = 2.0 * alpha * r
        a, b = 0.5 + m + m, 1 + 2 * m
        ref = float(series_reference("kummer_m", a=a, b=b, z=z))
        ref *= math.exp(-alpha * r) * z ** m
        pt = R.spectral_point(alpha, 1e-300)  # lambda -> 0 via tiny value
        v, _, _, _ = R.interior_solutions(m, pt, r)
        assert v.real == pytest.approx(ref, rel=1e-10)


class TestMatching:
    def test_wronskian_positive_side(self):
        mc = R.matching_coefficients(0, R.spectral_point(0.3, 0.04))
        assert abs(mc.W - (2.0 / math.pi) * (mc.B - 1j * mc.A)) < 1e-12 * abs(mc.W)

    def test_wronskian_negative_side(self):
        mc = R.matching_coefficients(-1, R.spectral_point(2.3, -0.04))
        assert abs(mc.W - mc.A) < 1e-12 * abs(mc.W)

    def test_small_lambda_leading_coefficient(self):
        # A_m (sqrt(l)/2)^nu 2/Gamma(nu) -> a'_m + nu a_m; at lambda = 1e-10
        # the lambda^mu correction sits safely below the 1e-3 budget
        m, alpha, lam = 0, 0.3, 1e-10
        nu = abs(m + alpha)
        mc = R.matching_coefficients(m, R.spectral_point(alpha, lam))
        c = R.threshold_constants(alpha, m)
        lead = mc.A * (math.sqrt(lam) / 2.0) ** nu * 2.0 / gamma(nu)
        assert lead.real == pytest.approx(c.denom, rel=1e-3)
        assert abs(lead.imag) < 1e-3 * abs(c.denom)

    def test_wronskian_r_independence(self):
        # r (Phi F' - Phi' F) is the constant W (the sqrt(r)-dressed
        # solutions have r-independent Wronskian)
        from magres2d.refop import _fphi_grid, _reduce
        pt = R.spectral_point(0.3, 0.04)
        mm, aa = _reduce(1, 0.3)
        rs = np.array([0.3, 0.9])
        F, Fp, P, Pp, W = _fphi_grid(mm, aa, 0.04, pt.kappa, rs)
        wr = rs * (P * Fp - Pp * F)
        assert abs(wr[0] - wr[1]) <= 1e-8 * abs(wr[0])
        assert abs(wr[0] - W) <= 1e-8 * abs(W)


class TestChannelKernel:
    def test_symmetry(self):
        pt = R.spectral_point(0.3, 0.02)
        a = R.channel_kernel(1, pt, 0.4, 2.5).value
        b = R.channel_kernel(1, pt, 2.5, 0.4).value
        assert a == b

    def test_ode_oracle_match(self):
        cl = kernel(0, 0.3, 0.05, 0.7, 1.8)
        od = ode_green(0, 0.3, 0.05, 0.7, 1.8)
        assert abs(cl - od) <= 1e-6 * abs(od)

    def test_free_case(self):
        # alpha -> 0 reproduces the free radial Green's function
        m, lam, r, rp = 1, 0.3, 0.5, 2.0
        val = kernel(m, 1e-12, lam, r, rp)
        sl = math.sqrt(lam)
        free = (1j * math.pi / 2.0) * bessel("J", m, sl * r).value * (
            bessel("J", m, sl * rp).value + 1j * bessel("Y", m, sl * rp).value)
        assert abs(val - free) <= 1e-8 * abs(free)

    def test_continuity_across_unit_circle(self):
        pt = R.spectral_point(0.3, 0.02)
        for m in (0, 1, -1):
            below = R.channel_kernel(m, pt, 1.0, 1.5).value
            above = R.channel_kernel(m, pt, 1.0 + 1e-12, 1.5).value
            assert abs(below - above) <= 1e-8 * abs(below)

    def test_negative_lambda_real_positive(self):
        pt = R.spectral_point(0.3, -0.1)
        for r in (0.3, 0.8, 1.5, 3.0):
            v = R.channel_kernel(0, pt, r, r).value
            assert abs(v.imag) <= 1e-10 * abs(v)
            assert v.real > 0

    def test_stone_positivity(self):
        for lam in (0.02, 0.3, 2.0):
            pt = R.spectral_point(0.3, lam)
            for r in (0.5, 1.4, 3.0):
                v = R.channel_kernel(0, pt, r, r).value
                assert v.imag >= -1e-10

    def test_minus_side_conjugate(self):
        vp = kernel(1, 0.3, 0.05, 0.7, 1.8, side=+1)
        vm = kernel(1, 0.3, 0.05, 0.7, 1.8, side=-1)
        assert vm == pytest.approx(np.conj(vp))

    def test_negative_alpha_symmetry(self):
        a = kernel(2, -1.7, 0.05, 0.7, 1.8)
        b = kernel(-2, 1.7, 0.05, 0.7, 1.8)
        assert a == b

    def test_diagonal_derivative_jump(self):
        # the sqrt(r r')-dressed kernel has d/dr jump -1 across r = r'
        pt = R.spectral_point(0.3, 0.05)
        r0, h = 1.4, 1e-5
        def frak(r, rp):
            return R.channel_kernel(0, pt, r, rp).value * math.sqrt(r * rp)
        above = (frak(r0 + 2 * h, r0) - frak(r0 + h, r0)) / h
        below = (frak(r0 - h, r0) - frak(r0 - 2 * h, r0)) / h
        assert (above - below).real == pytest.approx(-1.0, abs=1e-4)
        assert abs((above - below).imag) < 1e-4

    def test_ode_residual_off_diagonal(self):
        # (frak-h_m - lambda) applied in r' to the dressed kernel vanishes
        # away from the diagonal (scaled 3-point finite differences)
        m, alpha, lam, r = 1, 0.3, 0.05, 0.6
        pt = R.spectral_point(alpha, lam)
        h = 1e-3
        def frak(rp):
            return R.channel_kernel(m, pt, r, rp).value * math.sqrt(r * rp)
        for rp in (1.6, 2.4, 3.1):
            f0, fm, fp_ = frak(rp), frak(rp - h), frak(rp + h)
            d2 = (fp_ - 2.0 * f0 + fm) / h ** 2
            pot = (m / rp + alpha / rp) ** 2 - 0.25 / rp ** 2
            resid = -d2 + (pot - lam) * f0
            assert abs(resid) <= 1e-5 * max(abs(d2), abs(f0))

    def test_confluence_window_interpolation(self):
        cl = kernel(0, 1.0, 1.0, 0.7, 1.8)   # lambda = alpha^2 exactly
        od = ode_green(0, 1.0, 1.0, 0.7, 1.8)
        assert abs(cl - od) <= 1e-6 * abs(od)


class TestFullKernel:
    def test_hermitian_below_spectrum(self):
        pt = R.spectral_point(0.3, -0.1)
        x, y = np.array([1.0, 0.0]), np.array([0.0, 2.0])
        kxy, _ = R.full_kernel(pt, x, y, m_max=25)
        kyx, _ = R.full_kernel(pt, y, x, m_max=25)
        assert kxy == pytest.approx(np.conj(kyx), rel=1e-10)

    def test_rotation_covariance(self):
        pt = R.spectral_point(0.3, -0.1)
        x, y = np.array([1.0, 0.0]), np.array([0.0, 2.0])
        phi = math.pi / 3.0
        rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        k1, _ = R.full_kernel(pt, x, y, m_max=25)
        k2, _ = R.full_kernel(pt, rot @ x, rot @ y, m_max=25)
        assert k2 == pytest.approx(k1, rel=1e-9)

    def test_single_channel_projection(self):
        # integrating e^{-im(theta-theta')} against the full kernel recovers
        # the channel kernel (trapezoid in the angle difference is exact)
        m, alpha, lam, r, rp = -2, 2.3, 0.01, 0.8, 1.4
        pt = R.spectral_point(alpha, lam)
        n = 64
        dth = 2.0 * math.pi / n
        acc = 0.0j
        for j in range(n):
            th = j * dth
            # the truncated channels are orthogonal to the projected mode,
            # so a loose tail gate suffices here
            val, _ = R.full_kernel(pt, np.array([r * math.cos(th), r * math.sin(th)]),
                                   np.array([rp, 0.0]), m_max=12, tail_tol=1e-3)
            acc += val * cmath.exp(-1j * m * th) * dth
        direct = R.channel_kernel(m, pt, r, rp).value
        assert acc == pytest.approx(direct, rel=1e-6)

    def test_mmax_guard(self):
        pt = R.spectral_point(2.3, 0.01)
        with pytest.raises(R.RefOpError):
            R.full_kernel(pt, np.array([1.0, 0.0]), np.array([0.0, 2.0]), m_max=4)


class TestThresholdG0:
    def test_outer_region_formula(self):
        # explicit check of the 1 < r < r' region at m=0, alpha=0.3 with
        # a_0, a'_0 from the lambda=0 Kummer series
        alpha, r, rp = 0.3, 2.0, 4.0
        c = R.threshold_constants(alpha, 0)
        expected = ((r / rp) ** 0.3 - c.ratio * (r * rp) ** (-0.3)) / 0.6
        assert R.threshold_g0(0, alpha, r, rp) == pytest.approx(expected, rel=1e-12)

    def test_limit_consistency(self):
        val = kernel(1, 0.3, 1e-10, 0.5, 0.8)
        g0 = R.threshold_g0(1, 0.3, 0.5, 0.8)
        assert abs(val - g0) <= 1e-4

    def test_channel_decay(self):
        # |G_{m,0}(0.5, 2)| <= (C/|m+alpha|) 0.5^|m| 2^{-|m+alpha|} scaling
        alpha = 0.3
        def envelope(m):
            nu = abs(m + alpha)
            return 0.5 ** abs(m) * 2.0 ** (-nu) / nu
        r3, r6 = (abs(R.threshold_g0(m, alpha, 0.5, 2.0)) for m in (3, 6))
        assert r6 / r3 <= 1.5 * envelope(6) / envelope(3)

    def test_region_continuity(self):
        # evaluate the adjacent region formulas at (numerically) the same
        # boundary point, so the kernel's own slope does not enter
        alpha = 0.3
        for m in (0, 1, -2):
            inner = R.threshold_g0(m, alpha, 0.5, 1.0)          # region 1
            outer = R.threshold_g0(m, alpha, 0.5, 1.0 + 1e-13)  # region 2
            assert inner == pytest.approx(outer, rel=1e-9)
            inner = R.threshold_g0(m, alpha, 1.0, 1.5)          # region 2
            outer = R.threshold_g0(m, alpha, 1.0 + 1e-13, 1.5)  # region 3
            assert inner == pytest.approx(outer, rel=1e-9)


class TestThresholdG1:
    def test_extraction_from_kernel(self):
        # least-squares extraction of the lambda^mu coefficient from the
        # k(alpha)-channel kernels over lambda in [1e-10, 1e-7]
        alpha, mu = 0.3, 0.3
        r, rp = 0.6, 0.9
        g0 = R.threshold_g0(0, alpha, r, rp)
        lams = np.geomspace(1e-12, 1e-10, 3)
        ests = [(kernel(0, alpha, lam, r, rp) - g0) / lam ** mu for lam in lams]
        est = np.mean(ests)
        assert est == pytest.approx(R.threshold_g1(alpha, r, rp), rel=5e-4)

    def test_prefactor_phase_identity(self):
        mu = 0.3
        lhs = 1j - math.cos(mu * math.pi) / math.sin(mu * math.pi)
        rhs = cmath.exp(1j * math.pi * (1.0 - mu)) / math.sin(mu * math.pi)
        assert lhs == pytest.approx(rhs, abs=1e-14)

    def test_symmetry(self):
        assert R.threshold_g1(0.3, 0.6, 1.9) == R.threshold_g1(0.3, 1.9, 0.6)

    def test_refusal_at_half(self):
        with pytest.raises(R.UnsupportedRegimeError):
            R.threshold_g1(0.5, 0.5, 0.7)
        with pytest.raises(R.UnsupportedRegimeError):
            R.threshold_g1(1.0, 0.5, 0.7)


class TestThresholdInteger:
    def test_log_increment(self):
        g0a, _ = R.threshold_integer(1.0, math.e, 4.0)
        g0b, _ = R.threshold_integer(1.0, 1.0, 4.0)
        assert g0a - g0b == pytest.approx(1.0, rel=1e-10)

    def test_k1_against_kernel_fit(self):
        # k_1 = 2(a/a' + log r)(a/a' + log rp) matches the (log lambda)^-1
        # coefficient extracted from the m=-2 kernel at alpha=2
        alpha, r, rp = 2.0, 2.0, 5.0
        g0, k1 = R.threshold_integer(alpha, r, rp)
        lams = np.geomspace(1e-8, 1e-4, 5)
        vals = np.array([kernel(-2, alpha, lam, r, rp) for lam in lams])
        logs = np.log(lams)
        # fit real part of (K - G0) = k1/log + c/log^2
        A = np.stack([1.0 / logs, 1.0 / logs ** 2], axis=1)
        coef, *_ = np.linalg.lstsq(A, (vals - g0).real, rcond=None)
        assert coef[0] == pytest.approx(k1, rel=0.05)

    def test_aprime_positive(self):
        for a in (1.0, 2.0, 3.0):
            c = R.threshold_constants(a, -int(a))
            assert c.ap > 0

    def test_alpha_zero_out_of_scope(self):
        with pytest.raises(R.UnsupportedRegimeError):
            R.threshold_integer(0.0, 1.0, 2.0)


class TestRemainderKernel:
    def test_small_at_threshold(self):
        rem = R.remainder_kernel(0, R.spectral_point(0.3, 1e-9), 0.5, 0.7)
        g1_term = abs(R.lam_power_branch(1e-9, 0.3) * R.threshold_g1(0.3, 0.5, 0.7))
        assert abs(rem) < 0.1 * g1_term

    def test_branch_continuity(self):
        # coefficients extracted from both sides agree within 5%
        alpha, mu, r, rp = 0.3, 0.3, 0.6, 0.9
        g0 = R.threshold_g0(0, alpha, r, rp)
        cp = (kernel(0, alpha, 1e-9, r, rp) - g0) / R.lam_power_branch(1e-9, mu)
        cm = (kernel(0, alpha, -1e-9, r, rp) - g0) / R.lam_power_branch(-1e-9, mu)
        assert abs(cp / cm - 1.0) < 0.05

    def test_off_channel_scaling(self):
        # m != k(alpha): |R_0^m - G_{m,0}| = O(lambda^min(2 mu, 1/2))
        alpha, m = 0.3, 1
        g0 = R.threshold_g0(m, alpha, 0.5, 0.7)
        d1 = abs(kernel(m, alpha, 1e-6, 0.5, 0.7) - g0)
        d2 = abs(kernel(m, alpha, 1e-4, 0.5, 0.7) - g0)
        ratio = d2 / d1
        expo = math.log10(ratio) / 2.0
        assert expo >= min(2 * 0.3, 0.5) - 0.1
