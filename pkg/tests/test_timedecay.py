"""Propagator elements, decay fits, Fourier lemmas and the prefactor."""
import math

import numpy as np
import pytest

from magres2d import timedecay as T
from magres2d import refop as ro


@pytest.fixture(scope="module")
def prop_03():
    f = T.make_state(0, (0.3, 4.0))
    return T.ChannelPropagator(0.3, f, f)


class TestStates:
    def test_unit_norm(self):
        st = T.make_state(0, (0.3, 4.0))
        from magres2d.quadrature import gauss_legendre
        x, w = gauss_legendre(300, 0.3, 4.0)
        assert np.sum(w * x * st.profile(x) ** 2) == pytest.approx(1.0, rel=1e-10)

    def test_support_guard(self):
        with pytest.raises(T.TimeDecayError):
            T.make_state(0, (0.05, 4.0))


class TestPropagator:
    def test_t_zero_normalization(self):
        # e^{-i 0 H} = 1: Stone's formula integrates the spectral density;
        # the cutoff tail at Lambda=40 sits inside the 1e-3 budget
        f = T.make_state(0, (0.3, 4.0))
        prop = T.ChannelPropagator(0.3, f, f, energy_cutoff=40.0)
        el = prop.element(1e-9)
        assert el.value.real + prop.rolloff_mass == pytest.approx(1.0, abs=1e-3)
        assert abs(el.value.imag) < 1e-6

    def test_unitarity(self, prop_03):
        for t in (1.0, 10.0, 100.0, 1e4):
            assert abs(prop_03.element(t).value) <= 1.0 + 1e-6

    def test_decade_ratio(self, prop_03):
        r = abs(prop_03.element(1000.0).value) / abs(prop_03.element(100.0).value)
        assert r == pytest.approx(10.0 ** -1.3, rel=0.15)

    def test_cross_channel_vanishes(self):
        f = T.make_state(0, (0.3, 4.0))
        g = T.make_state(1, (0.3, 4.0))
        el = T.propagator_element(0.3, f, g, 100.0)
        assert el.value == 0.0

    def test_truncation_estimate_scaling(self):
        # the Lambda-tail estimate drops at least like Lambda^-1/2
        f = T.make_state(0, (0.3, 4.0))
        p20 = T.ChannelPropagator(0.3, f, f, energy_cutoff=20.0)
        p40 = T.ChannelPropagator(0.3, f, f, energy_cutoff=40.0)
        assert p40.truncation_estimate(100.0) <= \
            p20.truncation_estimate(100.0) / math.sqrt(2.0) * 1.05


class TestDecayFit:
    def test_synthetic_power(self):
        ts = np.geomspace(1e2, 1e4, 9)
        vals = 2.0 * ts ** -1.3 * np.exp(1j * 0.4)
        fit = T.decay_fit(ts, vals, model="power")
        assert fit.exponent == pytest.approx(1.3, abs=1e-10)
        assert abs(fit.coefficient) == pytest.approx(2.0, rel=1e-10)

    def test_synthetic_powerlog_wins(self):
        ts = np.geomspace(1e2, 1e6, 12)
        vals = 3.0 / (ts * np.log(ts) ** 2)
        fit = T.decay_fit(ts, vals)
        assert fit.model == "power-log"

    def test_window_guard(self):
        with pytest.raises(T.TimeDecayError):
            T.decay_fit([1.0, 2.0, 3.0], [1.0, 0.5, 0.3])


class TestFourier:
    def test_power_transform(self):
        num, closed, est = T.fourier_check(0.3, 100.0)
        assert abs(num / closed) == pytest.approx(1.0, abs=0.02)
        assert abs(np.angle(num / closed)) <= 0.05

    def test_log_transform_k1(self):
        num, closed = T.fourier_log_check(1, 1e3)
        assert abs(num / closed) == pytest.approx(1.0, abs=0.10)

    def test_log_transform_k2_documented(self):
        # the k=2 transform carries only one sum term; its subleading
        # corrections are ~3/log t, so the agreement is correspondingly
        # loose at t = 1e3 (measured ratio ~0.60)
        num, closed = T.fourier_log_check(2, 1e3)
        assert 0.4 <= abs(num / closed) <= 1.6

    def test_nu_domain(self):
        with pytest.raises(T.TimeDecayError):
            T.fourier_check(0.7, 100.0)


class TestPrefactor:
    def test_alpha_03(self):
        f = T.make_state(0, (0.3, 4.0))
        ratio, _, _ = T.prefactor_check(0.3, f, f, ts=np.geomspace(1e4, 1e6, 9))
        assert 0.9 <= abs(ratio) <= 1.1
        assert abs(np.angle(ratio)) <= 0.1

    def test_g1_element_off_channel(self):
        f = T.make_state(1, (0.3, 4.0))
        assert T.g1_matrix_element(0.3, f, f) == 0.0

    def test_g1_element_phase(self):
        # arg <f, G_1 f> equals the arg of (i - cot(mu pi)) for positive
        # radial profiles: pi - mu pi
        f = T.make_state(0, (0.3, 4.0))
        val = T.g1_matrix_element(0.3, f, f)
        assert np.angle(val) == pytest.approx(math.pi * (1.0 - 0.3), abs=1e-10)


class TestIntegerLaw:
    def test_log_model_beats_law_power(self):
        f = T.make_state(-1, (0.3, 4.0))
        prop = T.ChannelPropagator(1.0, f, f)
        ts = np.geomspace(1e4, 1e8, 9)
        vals = [prop.element(t).value for t in ts]
        assert T.residual_ratio(ts, vals, law_exponent=1.0) < 0.5
