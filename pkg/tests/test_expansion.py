"""Norm surrogates, fits, Nystrom systems, bound checks and the Hardy probe.
The full-tolerance threshold-law fits run in the acceptance suite; here the
machinery is exercised at reduced scale."""
import math

import numpy as np
import pytest

from magres2d import expansion as E
from magres2d import gauge as G
from magres2d import refop as ro
from magres2d.quadrature import quad


@pytest.fixture(scope="module")
def grid():
    g = E.radial_grid()
    E.validate_grid_exactness(g)
    return g


class TestNorms:
    def test_zero_kernel(self, grid):
        est = E.weighted_channel_norm(np.zeros((len(grid.r),) * 2), 0, 0.1, 1.7,
                                      grid=grid)
        assert est.value == 0.0

    def test_rank_one_separable(self, grid):
        K = np.exp(-grid.r[:, None]) * np.exp(-grid.r[None, :])
        hs = E.hs_norm(K, grid, 0.0)
        ref, _ = quad(lambda r: np.exp(-2 * np.asarray(r)) * np.asarray(r),
                      1e-3, 50.0, abs_tol=1e-14)
        assert hs == pytest.approx(ref, rel=1e-8)

    def test_gm0_channel_decay(self, grid):
        n4 = E.hs_norm(ro.threshold_g0_matrix(4, 0.3, grid.r, grid.r), grid, 1.6)
        n8 = E.hs_norm(ro.threshold_g0_matrix(8, 0.3, grid.r, grid.r), grid, 1.6)
        pred = (8.3 / 4.3) ** -1.5
        assert n8 / n4 == pytest.approx(pred, rel=0.25)

    def test_hybrid_sandwich(self, grid):
        # hybrid upper bound >= (1/sqrt2) * Rayleigh lower bound
        K = ro.threshold_g0_matrix(0, 0.3, grid.r, grid.r)
        hyb = E.schur_hybrid_norm(K, grid, 1.7)
        low = E.rayleigh_lower_bound(K, grid, 1.7)
        assert hyb >= low / math.sqrt(2.0)

    def test_monotone_in_magnitude(self, grid):
        K = ro.threshold_g0_matrix(1, 0.3, grid.r, grid.r)
        assert E.hs_norm(2 * K, grid, 1.7) == pytest.approx(
            2 * E.hs_norm(K, grid, 1.7), rel=1e-12)


class TestPowerLawFit:
    def test_synthetic(self):
        x = np.geomspace(1e-8, 1e-3, 8)
        y = 3.5 * x ** 0.42
        fit = E.fit_power_law(x, y)
        assert fit.exponent == pytest.approx(0.42, abs=1e-12)
        assert abs(fit.coefficient - 3.5) < 1e-10
        assert fit.r_squared > 0.999999

    def test_needs_enough_nodes(self):
        with pytest.raises(E.ExpansionError):
            E.fit_power_law([1.0, 2.0], [1.0, 2.0])


class TestThresholdFit:
    def test_alpha_03_small(self):
        fit1, fit2 = E.threshold_fit(0.3, 1.7, np.geomspace(1e-8, 1e-4, 6),
                                     m_set=[-1, 0, 1])
        assert fit1.exponent == pytest.approx(0.3, abs=0.05)
        assert fit1.r_squared >= 0.99
        assert fit2.exponent >= 0.3 + 0.1

    def test_refuses_integer(self):
        with pytest.raises(E.ExpansionError):
            E.threshold_fit(1.0, 1.7)

    def test_negative_side_same_exponent(self):
        fit1, _ = E.threshold_fit(0.3, 1.7, np.geomspace(1e-8, 1e-4, 6),
                                  side="-", m_set=[0])
        assert fit1.exponent == pytest.approx(0.3, abs=0.05)


class TestGradientRemainder:
    def test_lambda_scaling(self):
        n6 = E.gradient_remainder_norm(0.3, 0, 1e-6, 1.7).value
        n4 = E.gradient_remainder_norm(0.3, 0, 1e-4, 1.7).value
        assert n4 / n6 >= 100.0 ** 0.3 * 0.8

    def test_angular_part_scales_with_m(self, grid):
        # on a fixed kernel the angular-derivative factor is exactly m/r'
        K = ro.threshold_g0_matrix(2, 0.3, grid.r, grid.r)
        n2 = E.hs_norm((2.0 / grid.r[None, :]) * K, grid, 1.7)
        n4 = E.hs_norm((4.0 / grid.r[None, :]) * K, grid, 1.7)
        assert n4 == pytest.approx(2.0 * n2, rel=1e-12)

    def test_g0_gradient_matches_fd(self, grid):
        mat = E.threshold_g0_gradient_matrix(1, 0.3, np.array([0.5, 0.8, 1.7]))
        h = 1e-6
        for i, r in enumerate([0.5, 0.8, 1.7]):
            for j, rp in enumerate([0.5, 0.8, 1.7]):
                if abs(r - rp) < 1e-12:
                    continue
                fd = (ro.threshold_g0(1, 0.3, r, rp + h)
                      - ro.threshold_g0(1, 0.3, r, rp - h)) / (2 * h)
                assert mat[i, j] == pytest.approx(fd, rel=1e-6)

    def test_g1_gradient_matches_fd(self):
        mat = E.threshold_g1_gradient_matrix(0.3, np.array([0.6, 1.4]))
        h = 1e-6
        fd = (ro.threshold_g1(0.3, 0.6, 1.4 + h)
              - ro.threshold_g1(0.3, 0.6, 1.4 - h)) / (2 * h)
        assert mat[0, 1] == pytest.approx(fd, rel=1e-6)


class TestNystrom:
    FIELD = G.make_field("gaussian", amp=0.3, width=1.5)
    V = staticmethod(lambda r: 0.01 / (1.0 + np.asarray(r)) ** 4)

    def test_identities(self):
        sys = E.nystrom_perturbed(0.3, self.FIELD, self.V, 1.7, m_set=[0, 1])
        for S in sys.values():
            n = len(S.grid.r)
            A = np.eye(n) + S.g0 * S.t_diag[None, :]
            resid = np.linalg.norm(A @ S.f0 - S.g0) / np.linalg.norm(S.g0)
            assert resid <= 1e-10
            B = np.eye(n) + S.t_diag[:, None] * S.g0
            lhs = S.t_diag[:, None] * S.f0
            rhs = np.linalg.solve(B, S.t_diag[:, None] * S.g0)
            dual = np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)
            assert dual <= 1e-10
            assert S.margin > 1e-6

    def test_b0_gives_t_zero(self):
        b0f = G.make_field("b0", alpha=0.3)
        td = E.t_coefficients(b0f, None, 0.3, 1, E.radial_grid())
        assert np.max(np.abs(td)) < 1e-10
        sys = E.nystrom_perturbed(0.3, b0f, None, 1.7, m_set=[0])
        S = sys[0]
        assert np.allclose(S.f0, S.g0, atol=1e-10 * np.abs(S.g0).max())

    def test_f1_amplitude_scaling(self):
        b0f = G.make_field("b0", alpha=0.3)
        diffs = {}
        for amp in (0.01, 0.02):
            V = lambda r, a=amp: a / (1.0 + np.asarray(r)) ** 4
            S = E.nystrom_perturbed(0.3, b0f, V, 1.7, m_set=[0])[0]
            meas = S.grid.w * S.grid.r
            G1 = ro.threshold_g1_matrix(0.3, S.grid.r, S.grid.r) * meas[None, :]
            diffs[amp] = E.hs_norm((S.f1 - G1) / meas[None, :], S.grid, 1.7)
        assert diffs[0.02] / diffs[0.01] == pytest.approx(2.0, rel=0.2)

    def test_resolvent_limit_extraction(self):
        sys = E.nystrom_perturbed(0.3, self.FIELD, self.V, 1.7, m_set=[0])
        S = sys[0]
        meas = S.grid.w * S.grid.r
        lam = 1e-6
        Rlim = E.nystrom_resolvent_limit(0.3, self.FIELD, self.V, 0, lam)
        extract = Rlim - ro.lam_power_branch(lam, 0.3) * S.f1
        dn = E.hs_norm((extract - S.f0) / meas[None, :], S.grid, 1.7)
        fn = E.hs_norm(S.f0 / meas[None, :], S.grid, 1.7)
        assert dn / fn <= 0.02

    def test_flux_mismatch(self):
        with pytest.raises(E.ExpansionError):
            E.nystrom_perturbed(0.4, self.FIELD, self.V, 1.7, m_set=[0])


class TestBoundChecks:
    @pytest.mark.parametrize("lemma", E.BOUND_LEMMAS)
    def test_pass(self, lemma):
        res = E.bound_check(lemma)
        assert res["pass"], res

    def test_lem_ik_exact_pointwise(self):
        res = E.bound_check("lem-ik")
        assert all(row["ratio"] <= 1.0 + 1e-12 for row in res["rows"])

    def test_lem_jy0_small_z_constant(self):
        # on (0,1] the quadratic branch is active and the constant is 1/4
        from magres2d.specfun import bessel_array
        z = np.geomspace(1e-3, 1.0, 50)
        j0 = bessel_array("J", 0.0, z)[0]
        assert np.max(np.abs(j0 - 1.0) / z ** 2) <= 1.0

    def test_unknown_lemma(self):
        with pytest.raises(E.ExpansionError):
            E.bound_check("lem-nope")


class TestHardy:
    def test_positive_ratio(self):
        fld = G.make_field("gaussian", amp=0.3, width=1.0)
        assert E.hardy_ratio(fld, 2.0) > 0.0

    def test_zero_field_no_power_weight_bound(self):
        # A == 0: the power-weight ratio collapses along spreading trials
        zero = G.make_field("gaussian", amp=0.0, width=1.0)
        widths = np.array([2.0, 4.0, 8.0])
        r = E.hardy_sweep(zero, widths, weight="power")
        slope = (math.log(r[1]) - math.log(r[0])) / math.log(2.0)
        assert slope <= -0.5
        # contrast: at flux 1/2 the ratio settles instead of collapsing
        half = G.make_field("gaussian", amp=0.5, width=1.0)
        rh = E.hardy_sweep(half, widths)
        assert rh[-1] > 0.3 * rh[0]
        assert rh[-1] / r[-1] > 1.2

    def test_integer_weight_finite(self):
        one = G.make_field("gaussian", amp=1.0, width=1.0)
        r = E.hardy_sweep(one, np.array([2.0, 8.0, 32.0]))
        assert np.all(np.isfinite(r)) and np.all(r > 0)
