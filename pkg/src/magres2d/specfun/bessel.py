"""Bessel functions J, Y, I, K of real order by power series, Hankel
asymptotics and order recurrences.

Evaluation regimes (crossovers validated against the extended-precision
series oracle and frozen in config):

  J : z <= 36  power series, double-double accumulation (the alternating
               series loses ~0.43*z digits; double-double keeps 1e-13)
      z > 36   Hankel asymptotics for nu <= 5, else downward (Miller)
               recurrence normalized at the fractional order by asymptotics
  Y : non-integer nu via the reflection identity from J_{+-nu}; integer or
      near-integer nu by a 4-point interpolation stencil in the order
      (the eps-limit of the reflection formula); z > 36 by upward
      recurrence seeded with asymptotics at the fractional order
  I : power series everywhere (all terms positive, no cancellation)
  K : z <= 2 via the modified reflection identity from I_{+-nu} (stencil at
      integer orders); z > 2 by trapezoid quadrature of
      K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt
"""
from __future__ import annotations

import math
import numpy as np

from .types import SpecialValue, DomainError, ConvergenceError
from .gammafn import recip_gamma, log_gamma, sinpi, cospi

BESSEL_KINDS = ("J", "Y", "I", "K")

_Z_SPLIT = 36.0         # series / large-z crossover (frozen)
_NU_ASYMP = 5.0         # direct Hankel asymptotics up to this order
_ORDER_CAP = 61.5       # channel truncation never needs more
_STENCIL = 7e-4         # order offset for integer-order interpolation

# ---------------------------------------------------------------------------
# double-double helpers (Dekker/Knuth), vectorized over numpy arrays
_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def _dd_add(xh, xl, yh, yl):
    sh, sl = _two_sum(xh, yh)
    sl = sl + (xl + yl)
    h, l = _two_sum(sh, sl)
    return h, l


def _dd_mul(xh, xl, yh, yl):
    ph, pl = _two_prod(xh, yh)
    pl = pl + (xh * yl + xl * yh)
    h, l = _two_sum(ph, pl)
    return h, l


def _dd_div(xh, xl, yh, yl):
    q1 = xh / yh
    rh, rl = _dd_mul(q1, 0.0 * q1, yh, yl)
    rh, rl = _dd_add(xh, xl, -rh, -rl)
    q2 = (rh + rl) / yh
    h, l = _two_sum(q1, q2)
    return h, l


# ---------------------------------------------------------------------------
# power series

def _front_factor(nu, z):
    """(z/2)^nu / Gamma(nu+1) with overflow guard; z may be an array.

    The power is split into an integer part (exact repeated squaring) and a
    fractional part, since exp(nu*log(z/2)) alone loses |nu log(z/2)|*eps
    relative accuracy, which the reflection formula then amplifies."""
    rg = recip_gamma(nu + 1.0)
    if rg == 0.0:
        return np.zeros_like(z)
    n_int = int(math.trunc(nu))
    frac = nu - n_int
    logs = nu * np.log(0.5 * z)
    mag = logs + math.log(abs(rg))
    if np.any(mag > 708.0):
        raise DomainError("bessel: front factor overflows double precision")
    if np.any(mag < -700.0):
        return np.exp(logs) * rg  # underflow region, accuracy immaterial
    base = np.power(0.5 * z, n_int) * np.exp(frac * np.log(0.5 * z))
    return base * rg


def _j_series_dd(nu, z):
    """J_nu(z) for array z (z <= _Z_SPLIT) by the power series, summed in
    double-double.  Returns (values, abs error estimates)."""
    z = np.asarray(z, dtype=float)
    t0 = _front_factor(nu, z)
    zq_h, zq_l = _two_prod(z, z)
    zq_h, zq_l = 0.25 * zq_h, 0.25 * zq_l
    th = np.ones_like(z)
    tl = np.zeros_like(z)
    sh, sl = th.copy(), tl.copy()
    abssum = np.ones_like(z)
    for k in range(1, 400):
        nk_h, nk_l = _two_sum(nu + 0.0, float(k))  # exact split of nu+k
        dh, dl = _dd_mul(float(k), 0.0, nk_h, nk_l)
        th, tl = _dd_mul(th, tl, -zq_h, -zq_l)
        th, tl = _dd_div(th, tl, dh, dl)
        sh, sl = _dd_add(sh, sl, th, tl)
        abssum += np.abs(th)
        if np.all(np.abs(th) <= 1e-33 * np.maximum(np.abs(sh), 1e-290)) and k > 4:
            break
    else:
        raise ConvergenceError("bessel J series did not converge")
    val = t0 * (sh + sl)
    err = np.abs(t0) * (1e-31 * abssum) + np.abs(val) * 2e-14
    return val, err


def _i_series(nu, z):
    """I_nu(z) by the (all-positive) power series; z array."""
    z = np.asarray(z, dtype=float)
    t0 = _front_factor(nu, z)
    zq = 0.25 * z * z
    term = np.ones_like(z)
    s = np.ones_like(z)
    for k in range(1, 500):
        term = term * zq / (k * (nu + k))
        s += term
        if np.all(np.abs(term) <= 1e-18 * np.abs(s)) and k > 4:
            break
    else:
        raise ConvergenceError("bessel I series did not converge")
    val = t0 * s
    return val, np.abs(val) * 1e-13


# ---------------------------------------------------------------------------
# large-argument asymptotics (AS 9.2), valid z > _Z_SPLIT and moderate order

def _hankel_pq(nu, z):
    """P, Q sums of the Hankel expansion with a first-omitted-term bound."""
    mu4 = 4.0 * nu * nu
    c = np.ones_like(z)
    P = np.ones_like(z)
    Q = np.zeros_like(z)
    err = np.zeros_like(z)
    sign_p, sign_q = -1.0, 1.0
    k = 0
    cmin = np.full_like(z, np.inf)
    while k < 40:
        k += 1
        c = c * (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * z)
        mag = np.abs(c)
        if np.all(mag >= cmin):
            err += mag
            break
        cmin = np.minimum(cmin, mag)
        if k % 2 == 1:
            Q += sign_q * c
            sign_q = -sign_q
        else:
            P += sign_p * c
            sign_p = -sign_p
        if np.all(mag < 1e-18):
            break
    err += np.abs(c)
    return P, Q, err


def _jy_asymptotic(nu, z):
    """(J, Y, abs_err) for z > _Z_SPLIT, nu <= _NU_ASYMP."""
    z = np.asarray(z, dtype=float)
    P, Q, cerr = _hankel_pq(nu, z)
    omega = z - (0.5 * nu + 0.25) * math.pi
    amp = np.sqrt(2.0 / (math.pi * z))
    J = amp * (P * np.cos(omega) - Q * np.sin(omega))
    Y = amp * (P * np.sin(omega) + Q * np.cos(omega))
    err = amp * (cerr + 1e-15 * (np.abs(z) + 1.0))
    return J, Y, err


def _jy_recurrence(nu, z):
    """(J_nu, Y_nu, err) for z > _Z_SPLIT, nu > _NU_ASYMP.

    Y by upward recurrence from asymptotic seeds at the fractional order;
    J by downward recurrence from well above the turning point, normalized
    at the fractional order."""
    z = np.asarray(z, dtype=float)
    n_int = int(math.floor(nu))
    mu0 = nu - n_int
    j0, y0, e0 = _jy_asymptotic(mu0, z)
    j1, y1, e1 = _jy_asymptotic(mu0 + 1.0, z)
    # upward for Y
    ym, yc = y0, y1
    for n in range(1, n_int):
        ym, yc = yc, (2.0 * (mu0 + n) / z) * yc - ym
    Y = yc if n_int >= 1 else y0
    # downward for J: start above the turning point max(nu, z)
    zmax = float(np.max(z))
    margin = 20 + int(8.0 * zmax ** (1.0 / 3.0))
    N = max(n_int, int(math.ceil(zmax))) + margin
    pp = np.zeros_like(z)
    pc = np.full_like(z, 1e-290)
    Jn = np.zeros_like(z)
    for n in range(N, 0, -1):
        pp, pc = pc, (2.0 * (mu0 + n) / z) * pc - pp
        if n - 1 == n_int:
            Jn = pc.copy()
        big = np.abs(pc) > 1e250
        if np.any(big):
            pc = np.where(big, pc * 1e-40, pc)
            pp = np.where(big, pp * 1e-40, pp)
            Jn = np.where(big, Jn * 1e-40, Jn)
    scale = j0 / pc
    J = Jn * scale
    err = (np.abs(J) + np.abs(Y)) * 2e-14 + (e0 + e1) * np.abs(scale * Jn / np.maximum(j0, 1e-290))
    err = np.abs(J) * 5e-14 + np.abs(Y) * 5e-14 + e0 + e1
    return J, Y, err


# ---------------------------------------------------------------------------
# Y and K by reflection, with an interpolation stencil at integer orders

def _y_reflection(nu, z):
    """Y from J_{+-nu}; requires nu a safe distance from the integers."""
    s, c = sinpi(nu), cospi(nu)
    jp, ep = _j_series_dd(nu, z)
    jm, em = _j_series_dd(-nu, z)
    val = (jp * c - jm) / s
    err = (ep * abs(c) + em + 5e-16 * (np.abs(jp) + np.abs(jm))) / abs(s) \
        + np.abs(val) * 1e-14
    return val, err


def _k_reflection(nu, z):
    ip, ep = _i_series(nu, z)
    im, em = _i_series(-nu, z)
    s = sinpi(nu)
    val = 0.5 * math.pi * (im - ip) / s
    err = 0.5 * math.pi * (ep + em + 5e-16 * (np.abs(ip) + np.abs(im))) / abs(s) \
        + np.abs(val) * 1e-14
    return val, err


def _stencil_width(z):
    """Order-stencil spacing: the nu-derivatives of Y and K grow like
    |log(z/2)|^k, so the spacing shrinks accordingly."""
    L = max(1.0, float(np.max(np.abs(np.log(0.5 * np.asarray(z, dtype=float))))))
    return min(_STENCIL, 1.1e-3 / L)


def _order_stencil(fn, nu, z):
    """Evaluate fn (well-defined away from integer orders) at nu close to an
    integer by cubic interpolation through orders n + {-2,-1,1,2}*eps.

    The order-derivatives of Y and K grow like |log(z/2)|^k, so the stencil
    spacing shrinks accordingly to keep the interpolation error ~1e-11."""
    n = round(nu)
    eps = max(_stencil_width(z), 1.05 * abs(nu - n))
    offs = np.array([-2.0, -1.0, 1.0, 2.0]) * eps
    vals, errs = [], []
    for o in offs:
        v, e = fn(n + o, z)
        vals.append(v)
        errs.append(e)
    t = nu - n
    # Lagrange weights at t for the 4 offsets
    w = []
    for i, oi in enumerate(offs):
        num, den = 1.0, 1.0
        for j, oj in enumerate(offs):
            if i != j:
                num *= (t - oj)
                den *= (oi - oj)
        w.append(num / den)
    val = sum(wi * vi for wi, vi in zip(w, vals))
    err = sum(abs(wi) * ei for wi, ei in zip(w, errs)) + np.abs(val) * 1e-11
    return val, err


def _k_cosh_quad(nu, z):
    """K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt by trapezoid on the
    even extension; exponentially convergent for the analytic integrand."""
    z = np.asarray(z, dtype=float)
    zmin = float(np.min(z))
    tpk = math.asinh(nu / zmin) if nu > 0 else 0.0
    # T: integrand below 1e-20 * peak
    T = tpk + 2.0
    for _ in range(40):
        g = zmin * math.cosh(T) - nu * T
        gpk = zmin * math.cosh(tpk) - nu * tpk
        if g - gpk > 52.0:
            break
        T += 0.5
    h = min(0.08, 1.0 / (8.0 * math.sqrt(zmin)))

    def approx(hh):
        t = np.arange(0.0, T + hh, hh)
        w = np.exp(-np.outer(z, np.cosh(t)) + nu * t)
        w[:, 0] *= 0.5
        even = np.exp(np.outer(z, -np.cosh(t)) - nu * t)
        even[:, 0] *= 0.5
        return hh * 0.5 * (w.sum(axis=1) + even.sum(axis=1))

    v1 = approx(h)
    v2 = approx(0.5 * h)
    err = np.abs(v1 - v2) + np.abs(v2) * 1e-14
    return v2, err


# ---------------------------------------------------------------------------
# dispatch

def _j_array(nu, z):
    z = np.asarray(z, dtype=float)
    val = np.empty_like(z)
    err = np.empty_like(z)
    small = z <= _Z_SPLIT
    if np.any(small):
        val[small], err[small] = _j_series_dd(nu, z[small])
    if np.any(~small):
        zz = z[~small]
        if abs(nu) <= _NU_ASYMP:
            j, y, e = _jy_asymptotic(abs(nu), zz)
        else:
            j, y, e = _jy_recurrence(abs(nu), zz)
        if nu < 0:
            j = cospi(nu) * j + sinpi(nu) * y
            e = e * 2.0
        val[~small], err[~small] = j, e
    return val, err


def _y_array(nu, z):
    z = np.asarray(z, dtype=float)
    val = np.empty_like(z)
    err = np.empty_like(z)
    small = z <= _Z_SPLIT
    if np.any(small):
        zz = z[small]
        if abs(nu - round(nu)) < _stencil_width(zz):
            v, e = _order_stencil(_y_reflection, nu, zz)
        else:
            v, e = _y_reflection(nu, zz)
        val[small], err[small] = v, e
    if np.any(~small):
        zz = z[~small]
        if nu <= _NU_ASYMP:
            _, y, e = _jy_asymptotic(nu, zz)
        else:
            _, y, e = _jy_recurrence(nu, zz)
        val[~small], err[~small] = y, e
    return val, err


def _k_array(nu, z):
    z = np.asarray(z, dtype=float)
    val = np.empty_like(z)
    err = np.empty_like(z)
    small = z <= 2.0
    if np.any(small):
        zz = z[small]
        if abs(nu - round(nu)) < _stencil_width(zz):
            v, e = _order_stencil(_k_reflection, nu, zz)
        else:
            v, e = _k_reflection(nu, zz)
        val[small], err[small] = v, e
    if np.any(~small):
        val[~small], err[~small] = _k_cosh_quad(nu, z[~small])
    return val, err


def bessel_array(kind, nu, z):
    """Vectorized Bessel evaluation; returns (values, abs error estimates)."""
    if kind not in BESSEL_KINDS:
        raise DomainError(f"unknown Bessel kind {kind!r}")
    if abs(nu) > _ORDER_CAP:
        raise DomainError(f"order |nu|={abs(nu)} beyond supported range")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z <= 0.0) or not np.all(np.isfinite(z)):
        raise DomainError("bessel: need z > 0")
    if kind in ("Y", "K") and nu < 0.0:
        raise DomainError(f"bessel {kind}: need nu >= 0")
    if kind == "J":
        if nu < 0.0 and nu == math.floor(nu):
            # integer negative order via J_{-n} = (-1)^n J_n
            v, e = _j_array(-nu, z)
            return ((-1.0) ** int(-nu)) * v, e
        return _j_array(nu, z)
    if kind == "Y":
        return _y_array(nu, z)
    if kind == "I":
        return _i_series(nu, z)
    return _k_array(nu, z)


def bessel(kind, nu, z, tol=None) -> SpecialValue:
    """Single-point Bessel evaluation with error estimate."""
    v, e = bessel_array(kind, nu, np.array([float(z)]))
    out = SpecialValue(complex(v[0]), float(e[0]))
    if tol is not None:
        out.require(tol)
    return out


def bessel_derivative(kind, nu, z, tol=None) -> SpecialValue:
    """d/dz of the requested Bessel function via the order recurrences
    (forms using only orders nu and nu+1, safe for Y and K at small nu)."""
    z = float(z)
    f0 = bessel(kind, nu, z)
    f1 = bessel(kind, nu + 1.0, z)
    if kind in ("J", "Y"):
        val = -f1.value + (nu / z) * f0.value
    elif kind == "I":
        val = f1.value + (nu / z) * f0.value
    else:  # K
        val = -f1.value + (nu / z) * f0.value
    err = f1.abs_err_estimate + abs(nu / z) * f0.abs_err_estimate
    out = SpecialValue(val, err)
    if tol is not None:
        out.require(tol)
    return out
