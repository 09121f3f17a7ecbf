"""Closed-form partial-wave resolvent kernels of the reference operator
(radial field alpha/|x| inside the unit disc, zero outside).

Each channel m is assembled from interior Kummer solutions
    v = e^{-kr}(2kr)^{|m|} M(1/2+|m|+m a/k, 1+2|m|, 2kr),   k = sqrt(a^2-l),
(and the U-analogue) matched at r=1 to Bessel solutions of argument
sqrt(l) r (J,Y for l>0; I,K for l<0).  The Green's kernel is

    R_0^m(l; r, r') = F(r_<) Phi(r_>) / W,

with F regular at 0, Phi outgoing (decaying) at infinity, and W the
Sturm-Liouville normalization; on the positive side W = (2/pi)(B - iA),
on the negative side W equals the I-coefficient of the regular solution.

Threshold (l -> 0) kernels G_{m,0}, g_1 and the integer-flux variants are
the explicit three-region formulas, with the matching constants a_m, a'_m,
b_m, b'_m computed once per flux and cached.  Negative flux reduces to
positive via the exact symmetry R_0^m(alpha) = R_0^{-m}(-alpha).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .specfun import bessel_array, kummer_m, kummer_m_array, kummer_u, gamma_real
from .specfun.gammafn import cospi, sinpi
from .config import DEFAULT, Config


class RefOpError(RuntimeError):
    pass


class UnsupportedRegimeError(RefOpError):
    """Requested formula is not available in this parameter regime."""


# ---------------------------------------------------------------------------
# flux bookkeeping

@dataclass(frozen=True)
class FluxParams:
    alpha: float
    mu: float
    k_star: tuple          # one minimizer, or two when mu = 1/2
    integer_flux: bool

    @property
    def unique_k(self) -> int:
        if len(self.k_star) != 1:
            raise UnsupportedRegimeError("mu = 1/2: two minimizing channels")
        return self.k_star[0]


def flux_params(alpha: float) -> FluxParams:
    """Distance of the flux to the integers and the minimizing channel."""
    if not (abs(alpha) <= 50.0 and math.isfinite(alpha)):
        raise RefOpError("flux_params: need finite |alpha| <= 50")
    k = -round(alpha)
    mu = abs(k + alpha)
    if abs(mu - 0.5) < 1e-14:
        ks = tuple(sorted((k, k - 1 if k + alpha > 0 else k + 1)))
        return FluxParams(alpha, 0.5, ks, False)
    return FluxParams(alpha, mu, (k,), mu == 0.0)


@dataclass(frozen=True)
class SpectralPoint:
    alpha: float
    lam: complex            # real for boundary values; Im > 0 allowed
    side: int               # +1 for +i0, -1 for -i0 (real lambda only)
    kappa: complex


def spectral_point(alpha, lam, side=+1) -> SpectralPoint:
    lam = complex(lam)
    if lam == 0:
        raise RefOpError("spectral_point: lambda must be nonzero")
    if lam.imag < 0:
        raise RefOpError("spectral_point: use side=-1 instead of Im lambda < 0")
    a2 = alpha * alpha
    if lam.imag == 0.0 and lam.real > a2:
        kappa = 1j * math.sqrt(lam.real - a2)       # +i0 prescription
    else:
        kappa = cmath.sqrt(a2 - lam)
        if kappa.real < 0:
            kappa = -kappa
    # kappa = 0 (lambda = alpha^2) is allowed here; kernel evaluation routes
    # such points through the analytic interpolation window, while direct
    # interior/matching evaluation raises.
    return SpectralPoint(float(alpha), lam, int(side), kappa)


def _reduce(m, alpha):
    """Map to nonnegative flux via the exact symmetry m -> -m."""
    if alpha < 0:
        return -m, -alpha
    return m, alpha


# ---------------------------------------------------------------------------
# interior solutions

def _interior_scalar(m, alpha, kappa, r):
    """(v, v', u, u') at one interior radius; m, alpha already reduced."""
    if kappa == 0:
        raise RefOpError("interior solutions degenerate at lambda = alpha^2")
    a = 0.5 + abs(m) + m * alpha / kappa
    b = 1 + 2 * abs(m)
    z = 2.0 * kappa * r
    pref = cmath.exp(-kappa * r) * z ** abs(m)
    dpref = (-kappa + abs(m) / r) * pref
    mval = kummer_m(a, b, z).value
    dmv = (a / b) * kummer_m(a + 1, b + 1, z).value
    uval = kummer_u(a, b, z).value
    duv = -a * kummer_u(a + 1, b + 1, z).value
    v = pref * mval
    vp = dpref * mval + pref * 2.0 * kappa * dmv
    u = pref * uval
    up = dpref * uval + pref * 2.0 * kappa * duv
    return v, vp, u, up


def interior_solutions(m, point: SpectralPoint, r):
    """(v, v', u, u') at radius r in (0, 1]; primes are d/dr."""
    if not (0.0 < r <= 1.0):
        raise RefOpError("interior_solutions: r must lie in (0, 1]")
    mm, alpha = _reduce(m, point.alpha)
    v, vp, u, up = _interior_scalar(mm, alpha, point.kappa, float(r))
    if point.lam.imag == 0.0 and point.lam.real <= 0.75 * alpha * alpha:
        v, vp, u, up = v.real, vp.real, u.real, up.real
    if point.side < 0:
        v, vp, u, up = np.conj(v), np.conj(vp), np.conj(u), np.conj(up)
    return v, vp, u, up


def _interior_v_grid(m, alpha, kappa, r):
    """v and v' on an array of interior radii (vectorized Kummer series)."""
    a = 0.5 + abs(m) + m * alpha / kappa
    b = 1 + 2 * abs(m)
    r = np.asarray(r, dtype=float)
    z = 2.0 * kappa * r
    pref = np.exp(-kappa * r) * z ** abs(m)
    dpref = (-kappa + abs(m) / r) * pref
    mval, _ = kummer_m_array(a, b, z)
    dmval, _ = kummer_m_array(a + 1, b + 1, z)
    v = pref * mval
    vp = dpref * mval + pref * 2.0 * kappa * (a / b) * dmval
    return v, vp


def _interior_u_grid(m, alpha, kappa, r):
    a = 0.5 + abs(m) + m * alpha / kappa
    b = 1 + 2 * abs(m)
    r = np.asarray(r, dtype=float)
    u = np.empty(r.shape, dtype=complex)
    up = np.empty(r.shape, dtype=complex)
    flat_u, flat_up = u.ravel(), up.ravel()
    for i, ri in enumerate(r.ravel()):
        z = 2.0 * kappa * ri
        pref = cmath.exp(-kappa * ri) * z ** abs(m)
        uval = kummer_u(a, b, z).value
        duval = -a * kummer_u(a + 1, b + 1, z).value
        flat_u[i] = pref * uval
        flat_up[i] = (-kappa + abs(m) / ri) * pref * uval + pref * 2.0 * kappa * duval
    return u, up


# ---------------------------------------------------------------------------
# matching at r = 1

@dataclass(frozen=True)
class MatchingCoefficients:
    m: int
    A: complex
    B: complex
    C: complex
    D: complex
    W: complex
    branch: str    # 'JY' for lambda > 0, 'IK' for lambda < 0


def _bessel_val_der(kind, nu, z):
    """(L_nu(z), dL_nu/dz) via the nu+1 recurrences."""
    v0, _ = bessel_array(kind, nu, np.atleast_1d(z))
    v1, _ = bessel_array(kind, nu + 1.0, np.atleast_1d(z))
    zz = np.atleast_1d(z)
    if kind == "I":
        d = v1 + (nu / zz) * v0
    else:
        d = -v1 + (nu / zz) * v0
    return v0, d


def _match(m, alpha, lam, kappa):
    """Matching coefficients and Wronskian for reduced (m, alpha)."""
    nu = abs(m + alpha)
    v1, vp1, u1, up1 = _interior_scalar(m, alpha, kappa, 1.0)
    det2 = v1 * up1 - u1 * vp1
    if lam > 0:
        sl = math.sqrt(lam)
        (J,), (dJ,) = _bessel_val_der("J", nu, sl)
        (Y,), (dY,) = _bessel_val_der("Y", nu, sl)
        Jp, Yp = sl * dJ, sl * dY
        det = J * Yp - Y * Jp
        A = (v1 * Yp - Y * vp1) / det
        B = (J * vp1 - v1 * Jp) / det
        w, wp = J + 1j * Y, Jp + 1j * Yp
        C = (w * up1 - u1 * wp) / det2
        D = (v1 * wp - w * vp1) / det2
        W = (2.0 / math.pi) * (B - 1j * A)
        return A, B, C, D, W, "JY"
    kt = math.sqrt(-lam)
    (I,), (dI,) = _bessel_val_der("I", nu, kt)
    (K,), (dK,) = _bessel_val_der("K", nu, kt)
    Ip, Kp = kt * dI, kt * dK
    det = I * Kp - K * Ip
    A = (v1 * Kp - K * vp1) / det
    B = (I * vp1 - v1 * Ip) / det
    C = (K * up1 - u1 * Kp) / det2
    D = (v1 * Kp - K * vp1) / det2
    return A, B, C, D, A, "IK"


def matching_coefficients(m, point: SpectralPoint) -> MatchingCoefficients:
    if point.lam.imag != 0.0 or point.lam.real == 0.0:
        raise RefOpError("matching_coefficients: real nonzero lambda only")
    mm, alpha = _reduce(m, point.alpha)
    A, B, C, D, W, branch = _match(mm, alpha, point.lam.real, point.kappa)
    if point.side < 0:
        A, B, C, D, W = (np.conj(A), np.conj(B), np.conj(C), np.conj(D), np.conj(W))
    return MatchingCoefficients(m, complex(A), complex(B), complex(C),
                                complex(D), complex(W), branch)


# ---------------------------------------------------------------------------
# channel kernels

@dataclass(frozen=True)
class ChannelEval:
    m: int
    point: SpectralPoint
    r: float
    rp: float
    value: complex


def _fphi_grid(m, alpha, lam, kappa, r):
    """Regular solution F, outgoing/decaying solution Phi, the Wronskian W,
    and d/dr values, on an array of radii; (m, alpha) reduced, lam real."""
    r = np.asarray(r, dtype=float)
    nu = abs(m + alpha)
    inside = r <= 1.0
    F = np.empty(r.shape, dtype=complex)
    Fp = np.empty(r.shape, dtype=complex)
    P = np.empty(r.shape, dtype=complex)
    Pp = np.empty(r.shape, dtype=complex)
    A, B, C, D, W, branch = _match(m, alpha, lam, kappa)
    if np.any(~inside):
        rr = r[~inside]
        if branch == "JY":
            sl = math.sqrt(lam)
            z = sl * rr
            j0, dj0 = _bessel_val_der("J", nu, z)
            y0, dy0 = _bessel_val_der("Y", nu, z)
            F[~inside] = A * j0 + B * y0
            Fp[~inside] = sl * (A * dj0 + B * dy0)
            P[~inside] = j0 + 1j * y0
            Pp[~inside] = sl * (dj0 + 1j * dy0)
        else:
            kt = math.sqrt(-lam)
            z = kt * rr
            i0, di0 = _bessel_val_der("I", nu, z)
            k0, dk0 = _bessel_val_der("K", nu, z)
            F[~inside] = A * i0 + B * k0
            Fp[~inside] = kt * (A * di0 + B * dk0)
            P[~inside] = k0
            Pp[~inside] = kt * dk0
    if np.any(inside):
        vi, vpi = _interior_v_grid(m, alpha, kappa, r[inside])
        ui, upi = _interior_u_grid(m, alpha, kappa, r[inside])
        F[inside] = vi
        Fp[inside] = vpi
        P[inside] = C * vi + D * ui
        Pp[inside] = C * vpi + D * upi
    return F, Fp, P, Pp, W


def _near_confluence(alpha, lam, cfg: Config):
    a2 = alpha * alpha
    win = cfg.confluence_halfwidth * max(1.0, a2)
    return a2 > 0 and lam.imag == 0.0 and lam.real > 0 and abs(lam.real - a2) < win


def _kernel_values(m, point: SpectralPoint, r_arr, rp_arr):
    """Kernel at paired radii (r_arr[i], rp_arr[i]) for one real lambda."""
    mm, alpha = _reduce(m, point.alpha)
    rs = np.unique(np.concatenate([r_arr, rp_arr]))
    F, _, P, _, W = _fphi_grid(mm, alpha, point.lam.real, point.kappa, rs)
    fd = dict(zip(rs, F))
    pd = dict(zip(rs, P))
    vals = np.array([fd[min(a, b)] * pd[max(a, b)] / W
                     for a, b in zip(r_arr, rp_arr)])
    if point.side < 0:
        vals = np.conj(vals)
    return vals


def channel_kernel(m, point: SpectralPoint, r, rp, cfg: Config = DEFAULT) -> ChannelEval:
    """R_0^m(lambda +- i0; r, r') from the matched closed forms.

    Inside a small window around lambda = alpha^2 (where the Kummer
    parametrization degenerates although the kernel itself is analytic in
    lambda) the value is polynomially interpolated from anchors outside."""
    if r <= 0 or rp <= 0:
        raise RefOpError("channel_kernel: need r, rp > 0")
    if point.lam.imag != 0.0:
        raise RefOpError("channel_kernel: boundary values live on the real axis")
    lam = point.lam
    if not _near_confluence(point.alpha, lam, cfg):
        val = _kernel_values(m, point, np.array([r]), np.array([rp]))[0]
        return ChannelEval(m, point, float(r), float(rp), complex(val))
    a2 = point.alpha ** 2
    win = cfg.confluence_halfwidth * max(1.0, a2)
    nodes = np.concatenate([a2 - win * (1.0 + 0.75 * np.arange(4)),
                            a2 + win * (1.0 + 0.75 * np.arange(4))])
    vals = [_kernel_values(m, spectral_point(point.alpha, x, point.side),
                           np.array([r]), np.array([rp]))[0] for x in nodes]
    val = 0.0j
    for i, xi in enumerate(nodes):
        wgt = 1.0
        for j, xj in enumerate(nodes):
            if i != j:
                wgt *= (lam.real - xj) / (xi - xj)
        val += wgt * vals[i]
    return ChannelEval(m, point, float(r), float(rp), complex(val))


def channel_kernel_matrix(m, point: SpectralPoint, grid, cfg: Config = DEFAULT):
    """R_0^m on a tensor grid, using the separable kernel structure."""
    if _near_confluence(point.alpha, point.lam, cfg):
        raise RefOpError("channel_kernel_matrix inside the confluence window")
    mm, alpha = _reduce(m, point.alpha)
    grid = np.asarray(grid, dtype=float)
    F, _, P, _, W = _fphi_grid(mm, alpha, point.lam.real, point.kappa, grid)
    lower = np.outer(F, P) / W     # valid for r_i <= r_j
    K = np.where(grid[:, None] <= grid[None, :], lower, lower.T)
    if point.side < 0:
        K = np.conj(K)
    return K


def channel_gradient_matrix(m, point: SpectralPoint, grid, cfg: Config = DEFAULT):
    """(d/dr' R_0^m)(r, r') on a tensor grid (derivative in the second slot)."""
    if _near_confluence(point.alpha, point.lam, cfg):
        raise RefOpError("channel_gradient_matrix inside the confluence window")
    mm, alpha = _reduce(m, point.alpha)
    grid = np.asarray(grid, dtype=float)
    F, Fp, P, Pp, W = _fphi_grid(mm, alpha, point.lam.real, point.kappa, grid)
    upper = np.outer(F, Pp) / W    # r_i <= r_j: derivative hits Phi
    lower = np.outer(P, Fp) / W    # r_i >  r_j: derivative hits F
    K = np.where(grid[:, None] <= grid[None, :], upper, lower)
    if point.side < 0:
        K = np.conj(K)
    return K


def full_kernel(point: SpectralPoint, x, y, m_max=None, cfg: Config = DEFAULT,
                tail_tol=1e-8):
    """Two-dimensional kernel (1/2pi) sum_m R_0^m e^{im(theta-theta')} with a
    geometric tail bound; raises if the bound exceeds tail_tol at m_max."""
    m_max = m_max or cfg.m_max
    fp = flux_params(point.alpha)
    if m_max < abs(fp.k_star[0]) + 5:
        raise RefOpError("full_kernel: m_max below |k(alpha)| + 5")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r, th = math.hypot(*x), math.atan2(x[1], x[0])
    rp, thp = math.hypot(*y), math.atan2(y[1], y[0])
    if np.allclose(x, y, rtol=0, atol=1e-12):
        raise RefOpError("full_kernel: x = y is singular")
    total = 0.0j
    last = {}
    for m in range(-m_max, m_max + 1):
        val = channel_kernel(m, point, r, rp, cfg).value
        if abs(m) >= m_max - 1:
            last[m] = abs(val)
        total += val * cmath.exp(1j * m * (th - thp))
    total /= 2.0 * math.pi
    t1 = max(last[m_max], last[-m_max])
    t0 = max(last[m_max - 1], last[-m_max + 1], 1e-300)
    q = min(t1 / t0, 0.999)
    tail = t1 * q / max(1.0 - q, 1e-3) / math.pi
    if tail > tail_tol:
        raise RefOpError(f"full_kernel: tail bound {tail:.2e} above {tail_tol:.0e} "
                         f"at m_max={m_max}")
    return complex(total), float(tail)


# ---------------------------------------------------------------------------
# threshold kernels

@dataclass(frozen=True)
class ThresholdConstants:
    alpha: float
    m: int
    a: float
    ap: float
    b: float
    bp: float

    @property
    def denom(self) -> float:
        """a'_m + |m+alpha| a_m, positive for every channel."""
        mm, aa = _reduce(self.m, self.alpha)
        return self.ap + abs(mm + aa) * self.a

    @property
    def ratio(self) -> float:
        """(a'_m - |m+alpha| a_m) / (a'_m + |m+alpha| a_m)."""
        mm, aa = _reduce(self.m, self.alpha)
        return (self.ap - abs(mm + aa) * self.a) / self.denom


@lru_cache(maxsize=4096)
def threshold_constants(alpha: float, m: int) -> ThresholdConstants:
    """Values and r-derivatives of v_m(0,.) and u_m(0,.) at r = 1."""
    mm, aa = _reduce(m, alpha)
    if aa == 0:
        raise UnsupportedRegimeError("threshold constants need alpha != 0")
    v, vp, u, up = _interior_scalar(mm, aa, aa, 1.0)   # kappa = alpha at 0
    out = ThresholdConstants(alpha=float(alpha), m=int(m),
                             a=v.real, ap=vp.real, b=u.real, bp=up.real)
    if out.denom <= 0:
        raise RefOpError("threshold constants violate a' + nu a > 0")
    return out


def _v0_grid(alpha, m, r):
    mm, aa = _reduce(m, alpha)
    v, _ = _interior_v_grid(mm, aa, aa, np.asarray(r, dtype=float))
    return v.real


def _u0_grid(alpha, m, r):
    mm, aa = _reduce(m, alpha)
    u, _ = _interior_u_grid(mm, aa, aa, np.asarray(r, dtype=float))
    return u.real


def _lookup(table, arr):
    arr = np.asarray(arr)
    if arr.size == 0:
        return np.zeros(arr.shape)
    return np.vectorize(lambda t: table.get(t, 0.0))(arr)


def threshold_g0(m, alpha, r, rp) -> float:
    """G_{m,0}(r, r'): the lambda -> 0 limit of the channel kernel."""
    return float(threshold_g0_matrix(m, alpha, np.array([r]), np.array([rp]))[0, 0])


def threshold_g0_matrix(m, alpha, r, rp):
    """G_{m,0} on a product grid r x rp (symmetric in its arguments)."""
    mm, aa = _reduce(m, alpha)
    c = threshold_constants(alpha, m)
    nu = abs(mm + aa)
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    lo = np.minimum(r[:, None], rp[None, :])
    hi = np.maximum(r[:, None], rp[None, :])
    rs = np.unique(np.concatenate([r, rp]))
    ins = rs[rs <= 1.0]
    vin = dict(zip(ins, _v0_grid(alpha, m, ins))) if ins.size else {}
    uin = dict(zip(ins, _u0_grid(alpha, m, ins))) if ins.size else {}
    out = np.empty(lo.shape)
    both_in = hi <= 1.0
    mixed = (lo <= 1.0) & (hi > 1.0)
    both_out = lo > 1.0
    if both_in.any():
        pref = gamma_real(0.5 + mm + abs(mm)) / gamma_real(1.0 + 2 * abs(mm))
        out[both_in] = pref * _lookup(vin, lo[both_in]) * (
            _lookup(uin, hi[both_in])
            - ((c.bp + nu * c.b) / c.denom) * _lookup(vin, hi[both_in]))
    if mixed.any():
        out[mixed] = _lookup(vin, lo[mixed]) * hi[mixed] ** (-nu) / c.denom
    if both_out.any():
        out[both_out] = ((lo[both_out] / hi[both_out]) ** nu
                         - c.ratio * (lo[both_out] * hi[both_out]) ** (-nu)) / (2.0 * nu)
    return out


def threshold_g1(alpha, r, rp, fp: FluxParams | None = None) -> complex:
    """g_1(r, r'): coefficient of lambda^mu on the minimizing channel."""
    return complex(threshold_g1_matrix(alpha, np.array([r]), np.array([rp]), fp)[0, 0])


def threshold_g1_matrix(alpha, r, rp, fp: FluxParams | None = None):
    fp = fp or flux_params(alpha)
    if fp.integer_flux:
        raise UnsupportedRegimeError("threshold_g1: integer flux obeys the log law")
    if fp.mu >= 0.5 - 1e-14:
        raise UnsupportedRegimeError("threshold_g1: explicit formula needs mu < 1/2")
    k = fp.unique_k
    mu = fp.mu
    c = threshold_constants(alpha, k)
    q = c.ratio
    P = math.pi * (1j - cospi(mu) / sinpi(mu))
    G2 = 4.0 ** mu * gamma_real(mu) ** 2
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    lo = np.minimum(r[:, None], rp[None, :])
    hi = np.maximum(r[:, None], rp[None, :])
    rs = np.unique(np.concatenate([r, rp]))
    ins = rs[rs <= 1.0]
    vin = dict(zip(ins, _v0_grid(alpha, k, ins))) if ins.size else {}
    out = np.empty(lo.shape, dtype=complex)
    both_in = hi <= 1.0
    mixed = (lo <= 1.0) & (hi > 1.0)
    both_out = lo > 1.0
    if both_in.any():
        out[both_in] = (2.0 * P * _lookup(vin, lo[both_in])
                        * _lookup(vin, hi[both_in]) / (G2 * c.denom ** 2))
    if mixed.any():
        out[mixed] = (P * _lookup(vin, lo[mixed]) / (mu * G2 * c.denom)
                      * (hi[mixed] ** mu - q * hi[mixed] ** (-mu)))
    if both_out.any():
        out[both_out] = (P / (G2 * 2.0 * mu * mu)
                         * (lo[both_out] ** mu - q * lo[both_out] ** (-mu))
                         * (hi[both_out] ** mu - q * hi[both_out] ** (-mu)))
    return out


def _integer_constants(alpha):
    if alpha == 0 or alpha != round(alpha):
        raise UnsupportedRegimeError("integer-flux kernels need nonzero integer alpha")
    n = int(round(alpha))
    c = threshold_constants(float(alpha), -n)
    if c.ap <= 0:
        raise RefOpError("integer-flux constant a' must be positive")
    return n, c


def threshold_integer(alpha, r, rp):
    """(script-G_0, k_1) values for integer flux on the channel m = -alpha."""
    g0 = threshold_integer_g0_matrix(alpha, np.array([r]), np.array([rp]))[0, 0]
    k1 = threshold_integer_k1_matrix(alpha, np.array([r]), np.array([rp]))[0, 0]
    return float(g0), float(k1)


def threshold_integer_g0_matrix(alpha, r, rp):
    """Three-region script-G_{alpha,0}.  The inner-region prefactor is
    Gamma(1/2)/Gamma(1+2|alpha|): it is forced by Wronskian continuity at
    r'=1 and is cross-checked against the lambda -> 0 kernel limit."""
    n, c = _integer_constants(alpha)
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    lo = np.minimum(r[:, None], rp[None, :])
    hi = np.maximum(r[:, None], rp[None, :])
    rs = np.unique(np.concatenate([r, rp]))
    ins = rs[rs <= 1.0]
    vin = dict(zip(ins, _v0_grid(float(alpha), -n, ins))) if ins.size else {}
    uin = dict(zip(ins, _u0_grid(float(alpha), -n, ins))) if ins.size else {}
    out = np.empty(lo.shape)
    both_in = hi <= 1.0
    mixed = (lo <= 1.0) & (hi > 1.0)
    both_out = lo > 1.0
    if both_in.any():
        pref = gamma_real(0.5) / gamma_real(1.0 + 2.0 * abs(n))
        out[both_in] = pref * _lookup(vin, lo[both_in]) * (
            _lookup(uin, hi[both_in]) - (c.bp / c.ap) * _lookup(vin, hi[both_in]))
    if mixed.any():
        out[mixed] = _lookup(vin, lo[mixed]) / c.ap
    if both_out.any():
        out[both_out] = c.a / c.ap + np.log(lo[both_out])
    return out


def threshold_integer_k1_matrix(alpha, r, rp):
    n, c = _integer_constants(alpha)
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    lo = np.minimum(r[:, None], rp[None, :])
    hi = np.maximum(r[:, None], rp[None, :])
    rs = np.unique(np.concatenate([r, rp]))
    ins = rs[rs <= 1.0]
    vin = dict(zip(ins, _v0_grid(float(alpha), -n, ins))) if ins.size else {}
    out = np.empty(lo.shape)
    both_in = hi <= 1.0
    mixed = (lo <= 1.0) & (hi > 1.0)
    both_out = lo > 1.0
    if both_in.any():
        out[both_in] = 2.0 * _lookup(vin, lo[both_in]) * _lookup(vin, hi[both_in]) / c.ap ** 2
    if mixed.any():
        out[mixed] = 2.0 * (_lookup(vin, lo[mixed]) / c.ap) \
            * (c.a / c.ap + np.log(hi[mixed]))
    if both_out.any():
        out[both_out] = 2.0 * (c.a / c.ap + np.log(lo[both_out])) \
            * (c.a / c.ap + np.log(hi[both_out]))
    return out


# ---------------------------------------------------------------------------
# remainder kernels and branch rules

def lam_power_branch(lam, mu):
    """lambda^mu with the +i0 prescription: |lambda|^mu e^{i pi mu} on the
    negative real axis."""
    lam = complex(lam)
    if lam.imag == 0:
        if lam.real >= 0:
            return lam.real ** mu
        return abs(lam.real) ** mu * cmath.exp(1j * math.pi * mu)
    return lam ** mu


def log_branch(lam):
    """log(lambda + i0) = log|lambda| + i pi on the negative real axis."""
    lam = complex(lam)
    if lam.imag == 0 and lam.real < 0:
        return math.log(abs(lam.real)) + 1j * math.pi
    return cmath.log(lam)


def remainder_kernel(m, point: SpectralPoint, r, rp, cfg: Config = DEFAULT) -> complex:
    """R_0^m(lambda) minus its threshold expansion.

    Non-integer flux: subtract G_{m,0} plus (on the minimizing channel)
    lambda^mu g_1.  Integer flux: on m = k(alpha) = -alpha subtract
    script-G_0 + (log lambda)^{-1} k_1; on other channels subtract G_{m,0}."""
    fp = flux_params(point.alpha)
    val = channel_kernel(m, point, r, rp, cfg).value
    lam = point.lam.real
    if fp.integer_flux:
        if m == fp.k_star[0]:
            g0, k1 = threshold_integer(point.alpha, r, rp)
            sub = g0 + k1 / log_branch(lam)
        else:
            sub = threshold_g0(m, point.alpha, r, rp)
    else:
        if fp.mu >= 0.5 - 1e-14:
            raise UnsupportedRegimeError("remainder_kernel: mu = 1/2 tie")
        sub = threshold_g0(m, point.alpha, r, rp)
        if m == fp.unique_k:
            sub = sub + lam_power_branch(lam, fp.mu) * threshold_g1(point.alpha, r, rp, fp)
    if point.side < 0:
        sub = np.conj(sub)
    return complex(val - sub)
