"""Time decay through the spectral representation.

Propagator matrix elements are computed from Stone's formula,
    <f, e^{-itH} g> = (1/pi) int_0^Lambda e^{-it l} Im <f, R_0(l+i0) g> dl,
with the energy integral done by Filon panels: geometric panels [l, 2l]
from 1e-8 up to the cutoff, a degree-4 interpolant of the smooth inner
product on each panel, and the oscillatory moments integrated exactly.
A smooth roll-off on the last panels suppresses cutoff ringing, and the
[0, 1e-8] stub uses the local threshold model of the integrand.

Inner products use the separable structure of the channel kernel, so each
energy node costs O(N) special-function evaluations on the profile grid.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import refop as ro
from .config import DEFAULT, Config
from .quadrature import gauss_legendre
from .specfun import gamma, gamma_real
from .specfun.gammafn import sinpi


class TimeDecayError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# test states

@dataclass(frozen=True)
class TestState:
    """Smooth bump radial profile in one angular channel, unit L^2 norm."""
    m: int
    r_lo: float
    r_hi: float
    norm: float
    s: float = 2.6

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        y = (2.0 * r - (self.r_lo + self.r_hi)) / (self.r_hi - self.r_lo)
        out = np.zeros_like(r)
        mask = np.abs(y) < 1.0
        out[mask] = np.exp(-1.0 / (1.0 - y[mask] ** 2))
        return self.norm * out


def make_state(m, support=(0.3, 4.0), s=2.6) -> TestState:
    lo, hi = support
    if not (0.2 <= lo < hi <= 5.0):
        raise TimeDecayError("state support must lie inside [0.2, 5]")
    raw = TestState(m, lo, hi, 1.0, s)
    x, w = gauss_legendre(200, lo, hi)
    nrm = float(np.sum(w * x * raw.profile(x) ** 2))
    return TestState(m, lo, hi, 1.0 / math.sqrt(nrm), s)


# ---------------------------------------------------------------------------
# channel inner products  <f, R_0^m(lambda + i0) g>

class _InnerProduct:
    """Cached evaluator of h(lambda) = <f, R_0^m(l+i0) g> on the profile
    support grid, with the analytic-interpolation guard around l = alpha^2."""

    def __init__(self, alpha, f: TestState, g: TestState, n=96, cfg: Config = DEFAULT):
        if f.m != g.m:
            raise TimeDecayError("cross-channel inner products vanish; "
                                 "use the same channel for f and g")
        self.alpha, self.m, self.cfg = alpha, f.m, cfg
        lo = min(f.r_lo, g.r_lo)
        hi = max(f.r_hi, g.r_hi)
        self.r, self.w = gauss_legendre(n, lo, hi)
        self.wf = self.w * self.r * f.profile(self.r)
        self.wg = self.w * self.r * g.profile(self.r)
        self.mm, self.aa = ro._reduce(f.m, alpha)

    def _raw(self, lam):
        pt = ro.spectral_point(self.alpha, lam)
        F, _, P, _, W = ro._fphi_grid(self.mm, self.aa, float(lam), pt.kappa, self.r)
        s1 = np.cumsum(self.wf * F)            # int_{r <= r_j} f F r dr
        s2 = np.cumsum(self.wf * P)
        total2 = s2[-1]
        val = np.sum(self.wg * P * s1) + np.sum(self.wg * F * (total2 - s2))
        return complex(val / W)

    def __call__(self, lam):
        a2 = self.alpha ** 2
        win = self.cfg.confluence_halfwidth * max(1.0, a2)
        if not (a2 > 0 and abs(lam - a2) < win):
            return self._raw(lam)
        nodes = np.concatenate([a2 - win * (1.0 + 0.75 * np.arange(4)),
                                a2 + win * (1.0 + 0.75 * np.arange(4))])
        vals = [self._raw(x) for x in nodes]
        out = 0.0j
        for i, xi in enumerate(nodes):
            wgt = 1.0
            for j, xj in enumerate(nodes):
                if i != j:
                    wgt *= (lam - xj) / (xi - xj)
            out += wgt * vals[i]
        return out


# ---------------------------------------------------------------------------
# Filon machinery

_PANEL_NODES = np.polynomial.legendre.leggauss(5)[0]     # on [-1, 1]
_VANDER_INV = np.linalg.inv(np.vander(_PANEL_NODES, 5, increasing=True))


def _filon_moments(omega, kmax=5):
    """M_k = int_{-1}^{1} x^k e^{-i omega x} dx for k < kmax."""
    out = np.empty(kmax, dtype=complex)
    if abs(omega) < 0.5:
        # Taylor in omega, term j contributes to parity-matching k
        for k in range(kmax):
            acc = 0.0j
            term = 1.0 + 0.0j
            for j in range(0, 40):
                if (j + k) % 2 == 0:
                    acc += term * 2.0 / (j + k + 1.0)
                term *= -1j * omega / (j + 1.0)
                if abs(term) < 1e-18:
                    break
            out[k] = acc
        return out
    em = cmath.exp(1j * omega)       # e^{-i omega x} at x = -1
    ep = cmath.exp(-1j * omega)      # at x = +1
    out[0] = (ep - em) / (-1j * omega)
    for k in range(1, kmax):
        out[k] = (ep - ((-1.0) ** k) * em) / (-1j * omega) \
            + (k / (1j * omega)) * out[k - 1]
    return out


def _filon_panel(a, b, values, t):
    """int_a^b p(l) e^{-i t l} dl with p the degree-4 interpolant through
    `values` at the Gauss nodes of the panel."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    coeffs = _VANDER_INV @ np.asarray(values)
    moments = _filon_moments(t * half)
    return half * cmath.exp(-1j * t * mid) * complex(coeffs @ moments)


_VANDER_INV3 = np.linalg.inv(np.vander(_PANEL_NODES[::2], 3, increasing=True))


def _filon_panel_quadratic(a, b, values3, t):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    coeffs = _VANDER_INV3 @ np.asarray(values3)
    moments = _filon_moments(t * half, kmax=3)
    return half * cmath.exp(-1j * t * mid) * complex(coeffs @ moments)


@dataclass
class PropagatorElement:
    t: float
    value: complex
    quadrature_error: float


class ChannelPropagator:
    """Precomputes the spectral data of <f, e^{-itH} g> for one channel;
    evaluating at any t is then a fast Filon resummation."""

    def __init__(self, alpha, f: TestState, g: TestState, energy_cutoff=None,
                 lam_min=1e-8, cfg: Config = DEFAULT):
        self.alpha = alpha
        self.cfg = cfg
        self.cut = energy_cutoff or cfg.energy_cutoff
        self.lam_min = lam_min
        self.inner = _InnerProduct(alpha, f, g, cfg=cfg)
        self.fp = ro.flux_params(alpha)
        roll_start = 0.65 * self.cut
        width = self.cut - roll_start
        edges = [lam_min]
        while edges[-1] < roll_start:
            edges.append(min(2.0 * edges[-1], roll_start))
        # resolve the roll-off region finely so the interpolants track it
        edges.extend(np.linspace(roll_start, self.cut, 7)[1:])
        self.edges = np.array(edges)
        self.panels = []
        self.rolloff_mass = 0.0
        for a, b in zip(self.edges[:-1], self.edges[1:]):
            nodes = 0.5 * (a + b) + 0.5 * (b - a) * _PANEL_NODES
            hvals = np.array([self.inner(x).imag for x in nodes])
            roll = np.ones_like(nodes)
            mask = nodes > roll_start
            y = (nodes[mask] - roll_start) / width
            roll[mask] = 1.0 - (6 * y ** 5 - 15 * y ** 4 + 10 * y ** 3)
            self.panels.append((a, b, hvals * roll, hvals))
            self.rolloff_mass += 0.5 * (b - a) * float(
                np.polynomial.legendre.leggauss(5)[1] @ (hvals * (1.0 - roll)))
        self.rolloff_mass /= math.pi
        # local threshold model on [0, lam_min]
        h0 = self.inner(lam_min).imag
        if self.fp.integer_flux:
            self.stub = ("log", h0 * math.log(lam_min) ** 2)
        else:
            self.stub = ("power", h0 / lam_min ** self.fp.mu)
        # cutoff-tail envelope constant, from the |l|^{-1/2} kernel decay
        last = [abs(h) for (a, b, hv, hraw) in self.panels[-6:] for h in hraw]
        self.tail_const = max(last) * math.sqrt(self.cut)

    def _stub_integral(self, t):
        kind, c = self.stub
        if kind == "power":
            mu = self.fp.mu
            x, w = gauss_legendre(12, 0.0, self.lam_min)
            return c * complex(np.sum(w * x ** mu * np.exp(-1j * t * x)))
        x, w = gauss_legendre(12, 1e-14, self.lam_min)
        return c * complex(np.sum(w * np.exp(-1j * t * x) / np.log(x) ** 2))

    def element(self, t) -> PropagatorElement:
        total = self._stub_integral(t)
        err = abs(total) * 1e-3
        for (a, b, hv, _raw) in self.panels:
            fine = _filon_panel(a, b, hv, t)
            total += fine
            # error estimate: the degree-2 interpolant through the odd nodes
            # brackets the degree-4 one from well above
            coarse = _filon_panel_quadratic(a, b, hv[::2], t)
            err += 0.2 * abs(fine - coarse)
        trunc = self.tail_const / (self.cut ** 0.5 * max(t, 1.0)) / math.pi
        return PropagatorElement(t=float(t), value=complex(total / math.pi),
                                 quadrature_error=float(err / math.pi + trunc))

    def truncation_estimate(self, t) -> float:
        return self.tail_const / (self.cut ** 0.5 * max(t, 1.0)) / math.pi


def propagator_element(alpha, f: TestState, g: TestState, t,
                       energy_cutoff=None, cfg: Config = DEFAULT) -> PropagatorElement:
    """One-shot matrix element; for sweeps over t build a ChannelPropagator.

    Cross-channel elements vanish identically by angular orthogonality."""
    if f.m != g.m:
        return PropagatorElement(t=float(t), value=0.0j, quadrature_error=0.0)
    prop = ChannelPropagator(alpha, f, g, energy_cutoff, cfg=cfg)
    out = prop.element(t)
    if abs(out.value) > 1.0 + 1e-6:
        raise TimeDecayError(f"unitarity violated: |element| = {abs(out.value)}")
    return out


# ---------------------------------------------------------------------------
# decay fits

@dataclass(frozen=True)
class DecayFit:
    model: str                 # 'power' or 'power-log'
    exponent: float
    coefficient: complex
    r_squared: float
    residual: float


def decay_fit(ts, values, model="auto") -> DecayFit:
    """Fit |element(t)|: 'power' C t^-p against 'power-log' C t^-1 log^-2 t.

    With model='auto' both are fitted and the better residual wins."""
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values)
    mags = np.abs(vals)
    if len(ts) < 8 or math.log10(ts.max() / ts.min()) < 1.5:
        raise TimeDecayError("decay_fit: need >= 8 samples over >= 1.5 decades")
    if np.any(mags <= 0):
        raise TimeDecayError("decay_fit: degenerate samples")
    lt, lm = np.log(ts), np.log(mags)
    A = np.stack([lt, np.ones_like(lt)], axis=1)
    coef, *_ = np.linalg.lstsq(A, lm, rcond=None)
    pred = A @ coef
    res_pow = float(np.sqrt(np.mean((lm - pred) ** 2)))
    ss = float(np.sum((lm - np.mean(lm)) ** 2))
    r2 = 1.0 - float(np.sum((lm - pred) ** 2)) / ss if ss > 0 else 1.0
    cpow = _complex_coefficient(ts, vals, lambda t: t ** (-(-coef[0])))
    fit_pow = DecayFit("power", -float(coef[0]), cpow, r2, res_pow)
    if model == "power":
        return fit_pow
    shape = ts ** (-1.0) * np.log(ts) ** (-2.0)
    c0 = float(np.exp(np.mean(lm - np.log(shape))))
    res_log = float(np.sqrt(np.mean((lm - np.log(c0 * shape)) ** 2)))
    clog = _complex_coefficient(ts, vals, lambda t: t ** (-1.0) * math.log(t) ** (-2.0))
    fit_log = DecayFit("power-log", 1.0, clog, 1.0, res_log)
    if model == "power-log":
        return fit_log
    return fit_log if res_log < res_pow else fit_pow


def _complex_coefficient(ts, vals, shape_fn):
    shapes = np.array([shape_fn(t) for t in ts])
    return complex(np.sum(np.conj(shapes) * vals) / np.sum(shapes ** 2))


def residual_ratio(ts, values, law_exponent=None) -> float:
    """power-log residual / power residual (< 1 favours the log law).

    With law_exponent set (integer flux: 1 + mu = 1), the power model is the
    decay law C t^-p with p pinned -- the comparison the log-enhancement
    theorem makes.  A free-exponent power always shadows slowly-drifting
    log corrections over a short window, so it is only used when no law
    exponent is given."""
    ts = np.asarray(ts, dtype=float)
    mags = np.abs(np.asarray(values))
    f_log = decay_fit(ts, values, model="power-log")
    if law_exponent is None:
        f_pow = decay_fit(ts, values, model="power")
        return f_log.residual / f_pow.residual
    lm = np.log(mags)
    shape = -law_exponent * np.log(ts)
    c0 = float(np.mean(lm - shape))
    res_pow = float(np.sqrt(np.mean((lm - shape - c0) ** 2)))
    return f_log.residual / res_pow


# ---------------------------------------------------------------------------
# Fourier lemmas

def _smooth_bump(x):
    """C^inf cutoff: 1 on |x| <= 1/2, 0 on |x| >= 1."""
    x = abs(x)
    if x <= 0.5:
        return 1.0
    if x >= 1.0:
        return 0.0
    y = 2.0 * (x - 0.5)
    a = math.exp(-1.0 / max(1.0 - y, 1e-300))
    b = math.exp(-1.0 / max(y, 1e-300))
    return a / (a + b)


def _oscillatory_cutoff_integral(weight, t, a=1.0, lam_min=None):
    """(1/2 pi i) int e^{-itl} weight(l) chi(l/a) dl over [-a, a] by Filon
    panels accumulating geometrically at 0 from both sides."""
    lam_min = lam_min or min(1e-9, 0.01 / t)
    edges = [lam_min]
    while edges[-1] < 0.4 * a:
        edges.append(min(2.0 * edges[-1], 0.4 * a))
    # the cutoff transition lives on [a/2, a]: resolve it with fine panels
    edges.extend(np.linspace(0.4 * a, a, 13)[1:])
    total = 0.0j
    for sign in (+1.0, -1.0):
        for lo, hi in zip(edges[:-1], edges[1:]):
            aa, bb = (sign * lo, sign * hi) if sign > 0 else (sign * hi, sign * lo)
            nodes = 0.5 * (aa + bb) + 0.5 * (bb - aa) * _PANEL_NODES
            vals = np.array([weight(x) * _smooth_bump(x / a) for x in nodes])
            total += _filon_panel(aa, bb, vals, t)
    return total / (2.0j * math.pi)


def fourier_check(nu, t, a=1.0):
    """Regularized Fourier transform of (l + i0)^nu against the closed form
    (i sin(pi nu)/pi) e^{i pi nu / 2} Gamma(1+nu) t^{-1-nu}.

    Returns (numeric, closed form, cutoff-correction estimate).  The smooth
    compactly-supported cutoff makes the correction superpolynomially small;
    it is estimated by halving the cutoff scale."""
    if not (0.0 < nu <= 0.5):
        raise TimeDecayError("fourier_check: nu in (0, 1/2]")

    def weight(lam):
        if lam >= 0:
            return lam ** nu
        return abs(lam) ** nu * cmath.exp(1j * math.pi * nu)

    num = _oscillatory_cutoff_integral(weight, t, a)
    num_half = _oscillatory_cutoff_integral(weight, t, a / 2.0)
    closed = (1j * sinpi(nu) / math.pi) * cmath.exp(0.5j * math.pi * nu) \
        * gamma(1.0 + nu) * t ** (-1.0 - nu)
    # the stub below lam_min contributes ~ lam_min^(1+nu); fold into the est
    est = abs(num - num_half)
    return complex(num), complex(closed), float(est)


def fourier_log_check(k, t, a=0.5):
    """Regularized transform of (log(l + i0))^-k against the two-term sum
    i sum_{j=k}^{2} (-1)^j j t^-1 (log t)^{-j-1}.

    (The leading single term alone is 25%+ off at t = 1e3; the transform
    genuinely carries the j=2 companion term.)"""
    if k not in (1, 2):
        raise TimeDecayError("fourier_log_check: k in {1, 2}")

    def weight(lam):
        lg = math.log(abs(lam)) + (1j * math.pi if lam < 0 else 0.0)
        return lg ** (-k)

    num = _oscillatory_cutoff_integral(weight, t, a)
    closed = 1j * sum((-1.0) ** j * j * t ** (-1.0) * math.log(t) ** (-j - 1.0)
                      for j in range(k, 3))
    return complex(num), complex(closed)


# ---------------------------------------------------------------------------
# prefactor of the decay law

def g1_matrix_element(alpha, f: TestState, g: TestState, n=160):
    """<f, G_1 g> for states in the minimizing channel."""
    fp = ro.flux_params(alpha)
    if f.m != fp.unique_k or g.m != fp.unique_k:
        return 0.0j
    lo = min(f.r_lo, g.r_lo)
    hi = max(f.r_hi, g.r_hi)
    x, w = gauss_legendre(n, lo, hi)
    G1 = ro.threshold_g1_matrix(alpha, x, x, fp)
    wf = w * x * f.profile(x)
    wg = w * x * g.profile(x)
    return complex(wf @ G1 @ wg)


def prefactor_check(alpha, f: TestState, g: TestState, ts=None,
                    cfg: Config = DEFAULT):
    """Fitted decay coefficient divided by the theorem's value
    (i/pi) sin(pi mu) e^{i pi mu/2} Gamma(1+mu) <f, G_1 g>."""
    fp = ro.flux_params(alpha)
    if fp.integer_flux or fp.mu >= 0.5 - 1e-14:
        raise TimeDecayError("prefactor_check: non-integer flux with mu < 1/2")
    ts = np.asarray(ts if ts is not None else np.geomspace(2e2, 2e4, 9))
    prop = ChannelPropagator(alpha, f, g, cfg=cfg)
    vals = np.array([prop.element(t).value for t in ts])
    c_fit = _complex_coefficient(ts, vals, lambda t: t ** (-1.0 - fp.mu))
    kmat = (1j / math.pi) * sinpi(fp.mu) * cmath.exp(0.5j * math.pi * fp.mu) \
        * gamma(1.0 + fp.mu) * g1_matrix_element(alpha, f, g)
    if abs(kmat) == 0.0:
        raise TimeDecayError("prefactor_check: <f, G_1 g> vanishes")
    return complex(c_fit / kmat), complex(c_fit), complex(kmat)
