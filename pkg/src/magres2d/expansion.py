"""Weighted-norm machinery and threshold-expansion verification.

Operator norms are replaced by two quadrature surrogates on a log-mapped
Gauss-Legendre radial grid: a plain Hilbert-Schmidt norm, and the hybrid
bound that combines Schur row/column sup-integrals on (0,1)^2 with
Hilbert-Schmidt everywhere else.  Power-law and log-law fits of the
remainder norms verify the threshold expansions; the Nystrom systems
discretize the perturbed zero-energy coefficient operators for radial
fields and potentials (channels decouple there, because the corrected
gauge of a radial field is azimuthal and the angular derivative acts
spectrally).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import refop as ro
from . import gauge as gg
from .config import DEFAULT, Config
from .quadrature import gauss_legendre, quad
from .specfun import bessel_array, gamma_real, kummer_m, kummer_u
from .specfun.types import SpecFunError


class ExpansionError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# grids and norms

@dataclass(frozen=True)
class RadialGrid:
    r: np.ndarray
    w: np.ndarray          # weights including the r dr measure Jacobian

    @property
    def sqrt_meas(self):
        return np.sqrt(self.w * self.r)


def radial_grid(cfg: Config = DEFAULT, n=None, r_cut=None) -> RadialGrid:
    """Gauss-Legendre nodes under r = exp(t); weights are plain dt-weights
    times dr/dt = r, so sum w_i r_i f(r_i) ~ int f r dr."""
    n = n or cfg.n_grid
    r_cut = r_cut or cfg.r_cut
    t, wt = gauss_legendre(n, math.log(cfg.r_min), math.log(r_cut))
    r = np.exp(t)
    return RadialGrid(r=r, w=wt * r)


def validate_grid_exactness(grid: RadialGrid, s=1.6, tol=1e-6,
                            cfg: Config = DEFAULT):
    """Quadrature exactness on channel-envelope functions (power laws with
    the weight), against adaptive quadrature over the full [r_min, r_cut]
    interval the grid represents."""
    for expo in (-0.5, -1.2, -2.6):
        f = lambda r: np.asarray(r) ** expo / (1.0 + np.asarray(r)) ** (2 * s)
        num = float(np.sum(grid.w * grid.r * f(grid.r)))
        ref, _ = quad(lambda r: f(r) * r, cfg.r_min, max(cfg.r_cut, grid.r.max()),
                      abs_tol=1e-12, rel_tol=1e-12, points=(1.0,))
        if abs(num - ref) > tol * abs(ref):
            raise ExpansionError(f"grid exactness failed at power {expo}")


@dataclass(frozen=True)
class WeightedNormEstimate:
    s: float
    lam: complex
    channel: object           # int or "all"
    value: float
    method: str


def _weight(r, s):
    return (1.0 + np.asarray(r)) ** (-s)


def hs_norm(K, grid: RadialGrid, s) -> float:
    """Hilbert-Schmidt norm of rho^-s K rho^-s on L^2(r dr)."""
    w = _weight(grid.r, s)
    meas = grid.w * grid.r
    val = np.einsum("i,ij,j->", meas * w ** 2, np.abs(K) ** 2, meas * w ** 2)
    return math.sqrt(float(val))


def schur_hybrid_norm(K, grid: RadialGrid, s) -> float:
    """The (0,1)^2-Schur / elsewhere-HS hybrid bound on the operator norm."""
    w = _weight(grid.r, s)
    meas = grid.w * grid.r
    Kw = np.abs(w[:, None] * K * w[None, :])
    inside = grid.r <= 1.0
    Kin = Kw[np.ix_(inside, inside)]
    m_in = meas[inside]
    m1 = float(np.max(Kin @ m_in)) if inside.any() else 0.0
    m2 = float(np.max(m_in @ Kin)) if inside.any() else 0.0
    cross = 2.0 * float(np.einsum("i,ij,j->", meas[inside],
                                  Kw[np.ix_(inside, ~inside)] ** 2, meas[~inside]))
    outer = float(np.einsum("i,ij,j->", meas[~inside],
                            Kw[np.ix_(~inside, ~inside)] ** 2, meas[~inside]))
    return math.sqrt(m1 * m2 + cross + outer)


def weighted_channel_norm(kernel, m, lam, s, method="hilbert-schmidt",
                          grid: Optional[RadialGrid] = None,
                          cfg: Config = DEFAULT) -> WeightedNormEstimate:
    """Weighted norm surrogate of a channel kernel.

    `kernel` is either a matrix on the grid or a callable grid -> matrix."""
    grid = grid or radial_grid(cfg)
    K = kernel(grid) if callable(kernel) else np.asarray(kernel)
    if method == "hilbert-schmidt":
        val = hs_norm(K, grid, s)
    elif method == "schur-holmgren-hybrid":
        if s <= 1.0:
            raise ExpansionError("hybrid norm needs s > 1")
        val = schur_hybrid_norm(K, grid, s)
    else:
        raise ExpansionError(f"unknown norm method {method!r}")
    return WeightedNormEstimate(s=s, lam=complex(lam), channel=m,
                                value=val, method=method)


def rayleigh_lower_bound(K, grid: RadialGrid, s, n_vec=20, seed=1234) -> float:
    """Largest Rayleigh quotient of the weighted kernel over random test
    vectors: a lower bound for the operator norm (sanity sandwich)."""
    w = _weight(grid.r, s)
    meas = grid.w * grid.r
    sq = np.sqrt(meas)
    A = sq[:, None] * (w[:, None] * K * w[None, :]) * sq[None, :]
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(n_vec):
        v = rng.normal(size=len(grid.r))
        v /= np.linalg.norm(v)
        best = max(best, float(np.linalg.norm(A @ v)))
    return best


# ---------------------------------------------------------------------------
# remainder norms across channels

def _channel_window(alpha, width=2):
    k = ro.flux_params(alpha).k_star[0]
    return list(range(k - width, k + width + 1))


def remainder_norms_both(alpha, lam, s, m_set=None,
                         grid: Optional[RadialGrid] = None,
                         method="hilbert-schmidt", cfg: Config = DEFAULT):
    """Per-channel weighted norms of R_0^m(lam) - G_{m,0}, both before and
    after subtracting the lam^mu g_1 (or (log lam)^-1 k_1) term, computed
    in a single kernel pass.

    The norm of the full remainder operator is the sup over channels; only
    a window of channels around k(alpha) contributes at small lambda (the
    others are O(lambda) there, uniformly in m)."""
    grid = grid or radial_grid(cfg)
    fp = ro.flux_params(alpha)
    m_set = m_set if m_set is not None else _channel_window(alpha)
    pt = ro.spectral_point(alpha, lam)
    first, second = {}, {}
    for m in m_set:
        K = ro.channel_kernel_matrix(m, pt, grid.r, cfg)
        if fp.integer_flux and m == fp.k_star[0]:
            K = K - ro.threshold_integer_g0_matrix(alpha, grid.r, grid.r)
            K2 = K - ro.threshold_integer_k1_matrix(alpha, grid.r, grid.r) \
                / ro.log_branch(lam)
        else:
            K = K - ro.threshold_g0_matrix(m, alpha, grid.r, grid.r)
            K2 = K
            if not fp.integer_flux and fp.mu < 0.5 - 1e-14 and m == fp.unique_k:
                K2 = K - ro.lam_power_branch(lam, fp.mu) \
                    * ro.threshold_g1_matrix(alpha, grid.r, grid.r, fp)
        first[m] = weighted_channel_norm(K, m, lam, s, method, grid, cfg).value
        second[m] = weighted_channel_norm(K2, m, lam, s, method, grid, cfg).value
    return first, second


def remainder_norms(alpha, lam, s, m_set=None, subtract_g1=True,
                    grid: Optional[RadialGrid] = None, method="hilbert-schmidt",
                    cfg: Config = DEFAULT):
    """Per-channel weighted norms of R_0^m(lam) - G_{m,0} [- lam^mu g_1]."""
    first, second = remainder_norms_both(alpha, lam, s, m_set, grid, method, cfg)
    return second if subtract_g1 else first


# ---------------------------------------------------------------------------
# power-law fitting

@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    coefficient: complex
    r_squared: float
    max_residual: float
    model: str = "power"


def fit_power_law(x, y, reject_largest=True) -> PowerLawFit:
    """Least squares of log y against log x, optionally dropping the
    largest-x node (the one farthest from the asymptotic regime)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if reject_largest and len(x) > 3:
        keep = x < np.max(x)
        x, y = x[keep], y[keep]
    if len(x) < 3 or np.any(y <= 0):
        raise ExpansionError("fit_power_law: need >= 3 positive samples")
    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(exponent=float(coef[0]),
                       coefficient=complex(math.exp(coef[1])),
                       r_squared=r2,
                       max_residual=float(np.max(np.abs(ly - pred))))


def threshold_fit(alpha, s, lambda_grid=None, side="+", m_set=None,
                  cfg: Config = DEFAULT):
    """Fits (i) and (ii) of the non-integer threshold law.

    (i)  || rho^-s (R_0(l) - G_0) rho^-s || ~ l^mu,
    (ii) the full remainder after subtracting l^mu G_1 decays strictly
         faster (the proof-level rates are O(l) off-channel and o(sqrt(l))
         on-channel, so the fitted exponent clears mu + 0.1)."""
    fp = ro.flux_params(alpha)
    if fp.integer_flux or fp.mu >= 0.5 - 1e-14:
        raise ExpansionError("threshold_fit: needs non-integer flux, mu < 1/2")
    lambda_grid = np.asarray(lambda_grid if lambda_grid is not None
                             else np.geomspace(1e-8, 1e-3, 8), dtype=float)
    if len(lambda_grid) < 8 - 2:
        raise ExpansionError("threshold_fit: need >= 6 lambda nodes")
    sign = 1.0 if side == "+" else -1.0
    grid = radial_grid(cfg)
    n_first, n_rem = [], []
    for lam in lambda_grid:
        d0, d1 = remainder_norms_both(alpha, sign * lam, s, m_set,
                                      grid=grid, cfg=cfg)
        n_first.append(max(d0.values()))
        n_rem.append(max(d1.values()))
    fit1 = fit_power_law(lambda_grid, n_first)
    fit2 = fit_power_law(lambda_grid, n_rem)
    if fit1.r_squared < 0.99:
        raise ExpansionError(f"threshold_fit: poor fit, r^2 = {fit1.r_squared:.4f}")
    return fit1, fit2


def integer_threshold_fit(alpha, s, lambda_grid=None, m_set=None,
                          cfg: Config = DEFAULT):
    """Integer-flux log law: || R_0(l) - G_0 || |log l| plateaus, and the
    remainder after subtracting (log l)^-1 G_1 is o((log l)^-1)."""
    if alpha == 0 or alpha != round(alpha):
        raise ExpansionError("integer_threshold_fit: nonzero integer flux only")
    lambda_grid = np.asarray(lambda_grid if lambda_grid is not None
                             else np.geomspace(1e-10, 1e-6, 8), dtype=float)
    grid = radial_grid(cfg)
    plateau, rem_scaled = [], []
    for lam in lambda_grid:
        d0, d1 = remainder_norms_both(alpha, lam, s, m_set, grid=grid, cfg=cfg)
        plateau.append(max(d0.values()) * abs(math.log(lam)))
        rem_scaled.append(max(d1.values()) * abs(math.log(lam)))
    return np.array(plateau), np.array(rem_scaled), lambda_grid


def gradient_remainder_norm(alpha, m, lam, s, grid: Optional[RadialGrid] = None,
                            cfg: Config = DEFAULT) -> WeightedNormEstimate:
    """Norm surrogate built from the gradient remainder kernel
    sqrt((d_r' G_2)^2 + (m^2/r'^2) G_2^2)."""
    fp = ro.flux_params(alpha)
    if fp.integer_flux or fp.mu >= 0.5 - 1e-14:
        raise ExpansionError("gradient_remainder_norm: non-integer path only")
    grid = grid or radial_grid(cfg)
    pt = ro.spectral_point(alpha, lam)
    K = ro.channel_kernel_matrix(m, pt, grid.r, cfg) \
        - ro.threshold_g0_matrix(m, alpha, grid.r, grid.r)
    dK = ro.channel_gradient_matrix(m, pt, grid.r, cfg) \
        - threshold_g0_gradient_matrix(m, alpha, grid.r)
    if m == fp.unique_k:
        pw = ro.lam_power_branch(lam, fp.mu)
        K = K - pw * ro.threshold_g1_matrix(alpha, grid.r, grid.r, fp)
        dK = dK - pw * threshold_g1_gradient_matrix(alpha, grid.r, fp)
    tilde = np.sqrt(np.abs(dK) ** 2 + (m ** 2 / grid.r[None, :] ** 2) * np.abs(K) ** 2)
    val = hs_norm(tilde, grid, s)
    return WeightedNormEstimate(s=s, lam=complex(lam), channel=m, value=val,
                                method="hilbert-schmidt")


def _table_lookup(table):
    """Dict-backed lookup tolerant of empty mask selections."""
    def f(arr):
        arr = np.asarray(arr)
        if arr.size == 0:
            return np.zeros(arr.shape)
        return np.vectorize(lambda t: table.get(t, 0.0))(arr)
    return f


def threshold_g0_gradient_matrix(m, alpha, r):
    """d/dr' G_{m,0}(r, r') on the tensor grid (analytic in each region)."""
    mm, aa = ro._reduce(m, alpha)
    c = ro.threshold_constants(alpha, m)
    nu = abs(mm + aa)
    r = np.asarray(r, dtype=float)
    ri = r[:, None]
    rj = r[None, :]
    lo = np.minimum(ri, rj)
    hi = np.maximum(ri, rj)
    upper = rj >= ri       # derivative hits the larger argument
    ins = r[r <= 1.0]
    vv, vp = ro._interior_v_grid(mm, aa, aa, ins) if ins.size else (np.array([]),) * 2
    uu, up = ro._interior_u_grid(mm, aa, aa, ins) if ins.size else (np.array([]),) * 2
    vd = dict(zip(ins, np.real(vv)))
    vpd = dict(zip(ins, np.real(vp)))
    ud = dict(zip(ins, np.real(uu)))
    upd = dict(zip(ins, np.real(up)))
    Lv, Lvp = _table_lookup(vd), _table_lookup(vpd)
    Lu, Lup = _table_lookup(ud), _table_lookup(upd)
    out = np.empty(lo.shape)
    pref = gamma_real(0.5 + mm + abs(mm)) / gamma_real(1.0 + 2 * abs(mm))
    rat = (c.bp + nu * c.b) / c.denom
    both_in = hi <= 1.0
    mixed = (lo <= 1.0) & (hi > 1.0)
    both_out = lo > 1.0
    # derivative on the hi side
    mask = both_in & upper
    out[mask] = pref * Lv(lo[mask]) * (Lup(hi[mask]) - rat * Lvp(hi[mask]))
    mask = both_in & ~upper
    out[mask] = pref * Lvp(lo[mask]) * (Lu(hi[mask]) - rat * Lv(hi[mask]))
    mask = mixed & upper
    out[mask] = Lv(lo[mask]) * (-nu) * hi[mask] ** (-nu - 1.0) / c.denom
    mask = mixed & ~upper
    out[mask] = Lvp(lo[mask]) * hi[mask] ** (-nu) / c.denom
    mask = both_out & upper
    out[mask] = (-(lo[mask] / hi[mask]) ** nu
                 + c.ratio * (lo[mask] * hi[mask]) ** (-nu)) / (2.0 * hi[mask])
    mask = both_out & ~upper
    out[mask] = ((lo[mask] / hi[mask]) ** nu
                 + c.ratio * (lo[mask] * hi[mask]) ** (-nu)) / (2.0 * lo[mask])
    return out


def threshold_g1_gradient_matrix(alpha, r, fp=None):
    fp = fp or ro.flux_params(alpha)
    k = fp.unique_k
    mu = fp.mu
    c = ro.threshold_constants(alpha, k)
    q = c.ratio
    from .specfun.gammafn import cospi, sinpi
    P = math.pi * (1j - cospi(mu) / sinpi(mu))
    G2 = 4.0 ** mu * gamma_real(mu) ** 2
    r = np.asarray(r, dtype=float)
    ri, rj = r[:, None], r[None, :]
    lo, hi = np.minimum(ri, rj), np.maximum(ri, rj)
    upper = rj >= ri
    mm, aa = ro._reduce(k, alpha)
    ins = r[r <= 1.0]
    vv, vp = ro._interior_v_grid(mm, aa, aa, ins) if ins.size else (np.array([]),) * 2
    vd = dict(zip(ins, np.real(vv)))
    vpd = dict(zip(ins, np.real(vp)))
    Lv, Lvp = _table_lookup(vd), _table_lookup(vpd)
    out = np.empty(lo.shape, dtype=complex)
    both_in = hi <= 1.0
    mixed = (lo <= 1.0) & (hi > 1.0)
    both_out = lo > 1.0

    def comb(x):
        return x ** mu - q * x ** (-mu)

    def dcomb(x):
        return mu * (x ** (mu - 1.0) + q * x ** (-mu - 1.0))

    mask = both_in & upper
    out[mask] = 2.0 * P * Lv(lo[mask]) * Lvp(hi[mask]) / (G2 * c.denom ** 2)
    mask = both_in & ~upper
    out[mask] = 2.0 * P * Lvp(lo[mask]) * Lv(hi[mask]) / (G2 * c.denom ** 2)
    mask = mixed & upper
    out[mask] = P * Lv(lo[mask]) / (mu * G2 * c.denom) * dcomb(hi[mask])
    mask = mixed & ~upper
    out[mask] = P * Lvp(lo[mask]) / (mu * G2 * c.denom) * comb(hi[mask])
    mask = both_out & upper
    out[mask] = P / (G2 * 2.0 * mu * mu) * comb(lo[mask]) * dcomb(hi[mask])
    mask = both_out & ~upper
    out[mask] = P / (G2 * 2.0 * mu * mu) * dcomb(lo[mask]) * comb(hi[mask])
    return out


# ---------------------------------------------------------------------------
# Nystrom systems for the perturbed coefficients

@dataclass
class NystromSystem:
    m: int
    grid: RadialGrid
    s: float
    g0: np.ndarray            # discretized channel G_0 (operator matrix)
    t_diag: np.ndarray        # multiplication coefficients of T on the grid
    f0: np.ndarray
    f1: Optional[np.ndarray]
    margin: float             # smallest singular value of (1 + G_0 T)


def _azimuthal_profile(field: gg.FieldDescriptor, r):
    """a^(r) = (1/r) int_0^r B z dz for a radial field, on a sorted grid."""
    r = np.asarray(r, dtype=float)
    if field.radial is None:
        raise ExpansionError("nystrom systems need a radial field")
    vals = np.empty_like(r)
    prev_r, acc = 0.0, 0.0
    for i, ri in enumerate(r):
        seg, _ = quad(lambda z: field.radial(z) * np.asarray(z), prev_r, ri,
                      abs_tol=1e-13, rel_tol=1e-12)
        acc += seg
        vals[i] = acc / ri
        prev_r = ri
    return vals


def t_coefficients(field: gg.FieldDescriptor, V: Callable, alpha, m, grid: RadialGrid):
    """Per-channel multiplication coefficients of T(B,V) for radial B, V:
    T_m(r) = -2m (a^ - a_0)/r + (a^2 - a_0^2) + V."""
    ahat = _azimuthal_profile(field, grid.r)
    a0 = np.where(grid.r < 1.0, alpha, alpha / grid.r)
    v = V(grid.r) if V is not None else 0.0
    return -2.0 * m * (ahat - a0) / grid.r + (ahat ** 2 - a0 ** 2) + v


def nystrom_perturbed(alpha, field: gg.FieldDescriptor, V, s, m_set,
                      cfg: Config = DEFAULT, check_flux=True):
    """Per-channel (F0, F1, margin) solving (1 + G0 T) F0 = G0 and
    F1 = (1+G0 T)^-1 G1 (1+T G0)^-1 on the radial grid."""
    grid = radial_grid(cfg)
    validate_grid_exactness(grid)
    if check_flux:
        fl = gg.flux(field)
        if abs(fl - alpha) > 1e-6:
            raise ExpansionError(f"flux(B) = {fl} does not match alpha = {alpha}")
    if V is not None:
        vals = np.abs(V(np.geomspace(5.0, 50.0, 6)))
        decay = np.max(vals * (1.0 + np.geomspace(5.0, 50.0, 6)) ** 3)
        if decay > 1e3 * (np.max(np.abs(V(np.array([1.0])))) + 1e-12):
            raise ExpansionError("potential decays slower than (1+r)^-3")
    fp = ro.flux_params(alpha)
    meas = grid.w * grid.r
    systems = {}
    for m in m_set:
        g0k = ro.threshold_g0_matrix(m, alpha, grid.r, grid.r)
        G0 = g0k * meas[None, :]
        tdiag = t_coefficients(field, V, alpha, m, grid)
        A = np.eye(len(grid.r)) + G0 * tdiag[None, :]
        margin = float(np.linalg.svd(A, compute_uv=False)[-1])
        if margin <= 1e-6:
            raise ExpansionError(
                f"singular Nystrom system on channel {m}: margin {margin:.2e} "
                "(zero is not a regular point at this resolution)")
        F0 = np.linalg.solve(A, G0)
        F1 = None
        if (not fp.integer_flux and fp.mu < 0.5 - 1e-14 and m == fp.unique_k):
            G1 = ro.threshold_g1_matrix(alpha, grid.r, grid.r, fp) * meas[None, :]
            B = np.eye(len(grid.r)) + tdiag[:, None] * G0
            F1 = np.linalg.solve(A, np.linalg.solve(B.T, G1.T).T)
        systems[m] = NystromSystem(m=m, grid=grid, s=s, g0=G0, t_diag=tdiag,
                                   f0=F0, f1=F1, margin=margin)
    return systems


def nystrom_resolvent_limit(alpha, field, V, m, lam, cfg: Config = DEFAULT):
    """(1 + R_0(lam) T)^-1 R_0(lam) on the grid: the finite-lambda route to
    F_0, used as the independent assembly-path check."""
    grid = radial_grid(cfg)
    pt = ro.spectral_point(alpha, lam)
    meas = grid.w * grid.r
    R = ro.channel_kernel_matrix(m, pt, grid.r, cfg) * meas[None, :]
    tdiag = t_coefficients(field, V, alpha, m, grid)
    A = np.eye(len(grid.r)) + R * tdiag[None, :]
    return np.linalg.solve(A, R)


# ---------------------------------------------------------------------------
# appendix bound checks

BOUND_LEMMAS = ("lem-jj", "lem-int-JJ", "lem-int-JJ-prime", "lem-mixed",
                "lem-U", "lem-M", "lem-der-m", "lem-der-u", "lem-product",
                "lem-jy0", "lem-ik")


def _log_grid(a, b, n):
    return np.geomspace(a, b, n)


def _weighted_radial_integral(f, s, r_max=2000.0, n=1200):
    """int_1^rmax f(r) (1+r)^-2s r dr on a log-trapezoid grid."""
    r = _log_grid(1.0, r_max, n)
    vals = f(r) * (1.0 + r) ** (-2.0 * s) * r
    return float(np.trapezoid(vals, r))


def _bound_lem_jj(s=1.7, eps=0.1, nu=3.0, lams=(1e-2, 1e-4)):
    rows = []
    for lam in lams:
        sl = math.sqrt(lam)
        f = lambda r: bessel_array("J", nu, sl * r)[0] ** 2
        lhs = _weighted_radial_integral(f, s)
        rhs = (lam ** nu + lam ** (0.5 + eps)) / (1.0 + nu ** 2)
        rows.append({"lambda": lam, "ratio": lhs / rhs})
    return rows


def _dlam_product(fn, lam, rel=1e-2):
    h = lam * rel
    return (fn(lam + h) - fn(lam - h)) / (2.0 * h)


def _bound_lem_int_jj(s=1.7, eps=0.1, nu=1.3, lams=(1e-2, 1e-3), n=400,
                      derivative_order=None):
    """eq-JJ-1/2/3 (and the primed variants when derivative_order is 1 or 2):
    lambda-derivatives are taken by central differences of the product."""
    rows = []
    r = _log_grid(1.0, 800.0, n)
    wgt = (1.0 + r) ** (-2.0 * s) * r
    tri = (r[None, :] >= r[:, None])

    def jfac(kind_nu, lam, rr):
        return bessel_array("J", kind_nu, math.sqrt(lam) * rr)[0]

    def second(kind_nu, lam, rr):
        # J^(n) factors of the primed lemma
        base = jfac(kind_nu, lam, rr)
        if derivative_order is None:
            return base
        sl = math.sqrt(lam)
        jm = bessel_array("J", kind_nu - 1.0, sl * rr)[0]
        jp = bessel_array("J", kind_nu + 1.0, sl * rr)[0]
        if derivative_order == 1:
            return 0.5 * sl * (jm - jp)
        return 0.5 * sl * (jm + jp)

    for lam in lams:
        for tag, pow_, nus, rhs in (
                ("JJ-1", -nu, (nu, nu), lam ** (2 * eps - 1 - 2 * nu) / (1 + nu) ** 2),
                ("JJ-2", nu, (-nu, -nu), 2.0 ** (4 * nu) * gamma_real(nu) ** 4),
                ("JJ-3", 0.0, (nu, -nu), lam ** (eps - 1.0) / (1.0 + nu))):
            def prod(la):
                a = jfac(nus[0], la, r)
                b = second(nus[1], la, r)
                return la ** pow_ * np.outer(a, b)
            d = _dlam_product(prod, lam)
            integ = float(np.einsum("i,ij,j->", wgt, np.abs(d) ** 2 * tri, wgt))
            rows.append({"lambda": lam, "part": tag, "ratio": integ / rhs})
    return rows


def _bound_lem_mixed(s=1.7, eps=0.1, nu=1.7, lams=(1e-2, 1e-3)):
    # nu > 3/2 keeps the order nu-1 inside the monotonicity lemma's range
    # (for 1 < nu < 3/2 the mix-1 envelope picks up a log factor)
    rows = []
    r = _log_grid(1.0, 800.0, 1500)
    wgt = (1.0 + r) ** (-2.0 * s) * r
    for lam in lams:
        # the mix-1 envelope follows the proof chain, which yields a
        # lambda-independent constant (the transcribed lambda^eps factor
        # does not survive the monotonicity step)
        for tag, sgn, rhs in (
                ("mix-1", -1.0, 4.0 ** nu * gamma_real(nu - 1.0) ** 2),
                ("mix-2", +1.0, lam ** (nu - 1.5 + eps))):
            def fn(la):
                return la ** (nu / 2.0) * bessel_array("J", sgn * nu,
                                                       math.sqrt(la) * r)[0]
            d = _dlam_product(fn, lam)
            lhs = float(np.trapezoid(np.abs(d) ** 2 * wgt, r))
            rows.append({"lambda": lam, "part": tag, "ratio": lhs / rhs})
    return rows


def _bound_lem_u():
    rows = []
    for a, b, z in [(1.2, 3.0, 0.8), (2.5, 5.0, 2.0), (0.5, 3.0, 0.8),
                    (0.7, 9.0, 4.0), (1.0, 2.0, 0.3)]:
        lhs = gamma_real(a) * abs(kummer_u(a, b, z).value)
        if a >= 1.0:
            rhs = math.exp(z) * z ** (1.0 - b) * gamma_real(b - 1.0)
        else:
            rhs = 2.0 ** (b - a - 1.0) / a \
                + 2.0 ** (1.0 - a) * math.exp(z) * z ** (1.0 - b) * gamma_real(b - 1.0)
        rows.append({"a": a, "b": b, "z": z, "part": "u-upperb", "ratio": lhs / rhs})
        du = -a * kummer_u(a + 1.0, b + 1.0, z).value
        lhs2 = gamma_real(a) * abs(du)
        rhs2 = gamma_real(b) * math.exp(z) * z ** (-b)
        rows.append({"a": a, "b": b, "z": z, "part": "u'-upperb", "ratio": lhs2 / rhs2})
    return rows


def _bound_lem_m(alpha=0.3, z=1.0, lams=(0.05, 0.02)):
    rows = []
    for lam in lams:
        if lam > 0.75 * alpha ** 2:
            raise ExpansionError("lem-M grid must satisfy lambda <= 3 alpha^2/4")
        kap = math.sqrt(alpha ** 2 - lam)
        for j in (0, 1):
            worst = 0.0
            for m in range(-12, 13):
                a = 0.5 + j + abs(m) + m * alpha / kap
                b = 1 + j + 2 * abs(m)
                val = abs(kummer_m(a, b, z).value)
                worst = max(worst, val / math.exp(2.0 * z))
            rows.append({"lambda": lam, "part": f"M-1 j={j}", "ratio": worst})
        low = math.inf
        for m in range(-12, -5):
            a = 0.5 + abs(m) + m * alpha / kap
            b = 1 + 2 * abs(m)
            low = min(low, kummer_m(a, b, z).value.real)
        rows.append({"lambda": lam, "part": "M-2", "ratio": 0.5 / low})
    return rows


def _bound_lem_der_m():
    rows = []
    h = 1e-5
    for a, b, z in [(0.5, 3.0, 1.0), (-4.5, 7.0, 2.0), (6.5, 13.0, 0.5)]:
        da = (kummer_m(a + h, b, z).value - kummer_m(a - h, b, z).value) / (2 * h)
        rhs = abs(kummer_m(abs(a), b, 2.0 * z).value) / (1.0 + abs(a))
        rows.append({"a": a, "b": b, "z": z, "ratio": abs(da) / rhs})
    return rows


def _bound_lem_der_u():
    rows = []
    h = 1e-5
    for a, b, z in [(1.2, 3.0, 0.8), (0.7, 2.0, 1.5), (2.2, 5.0, 3.0)]:
        ga = lambda aa: gamma_real(aa) * kummer_u(aa, b, z).value.real
        da = (ga(a + h) - ga(a - h)) / (2 * h)
        rhs = 2.0 ** (b - a - 1.0) + math.exp(z) * z ** (1.0 - b) * gamma_real(b - 1.0)
        rows.append({"a": a, "b": b, "z": z, "ratio": abs(da) / rhs})
    return rows


def _bound_lem_product(nus=(5.0, 10.0, 20.0, 40.0)):
    """J_nu^2 and J_{nu+j} Y_nu are controlled on all of [1, nu+j]; the
    reversed product J_nu Y_{nu+j} only near the turning point [nu, nu+j]
    (the proof estimates it exactly there -- on [1, nu] it grows like a
    power of nu and is never used)."""
    rows = []
    for nu in nus:
        worst = 0.0
        for j in (0, 1, 2):
            t = np.linspace(1.0, nu + j, 160)
            jn = bessel_array("J", nu, t)[0]
            jj = bessel_array("J", nu + j, t)[0]
            yn = bessel_array("Y", nu, t)[0]
            val = np.max(jn ** 2 + np.abs(jj * yn))
            tt = np.linspace(nu, nu + max(j, 0.5), 60)
            jn2 = bessel_array("J", nu, tt)[0]
            yj2 = bessel_array("Y", nu + j, tt)[0]
            val = max(float(val), float(np.max(np.abs(jn2 * yj2))))
            worst = max(worst, val)
        rows.append({"nu": nu, "ratio": worst / nu ** (-2.0 / 3.0)})
    return rows


def _bound_lem_jy0():
    EULER = 0.5772156649015329
    z = np.geomspace(1e-3, 10.0, 200)
    j0 = bessel_array("J", 0.0, z)[0]
    y0 = bessel_array("Y", 0.0, z)[0]
    j1 = bessel_array("J", 1.0, z)[0]
    y1 = bessel_array("Y", 1.0, z)[0]
    rows = [
        {"part": "J0", "ratio": float(np.max(np.abs(j0 - 1.0) / np.minimum(z ** 2, 1.0)))},
        {"part": "Y0", "ratio": float(np.max(
            np.abs(y0 - (2.0 / math.pi) * (np.log(z / 2.0) + EULER))
            / ((np.abs(np.log(z)) + 1.0) * np.minimum(z ** 2, 1.0))))},
        {"part": "J0'", "ratio": float(np.max(np.abs(-j1) / np.minimum(z, np.sqrt(z))))},
        # Y0' needs the same log-corrected envelope as Y0: at integer order
        # the subleading term is (z/pi) log z, not O(z)
        {"part": "Y0'", "ratio": float(np.max(
            np.abs(-y1 - 2.0 / (math.pi * z))
            / ((np.abs(np.log(z)) + 1.0) * np.minimum(z, np.sqrt(z)))))},
    ]
    return rows


def _bound_lem_ik(n=50):
    rows = []
    nus = np.linspace(0.2, 8.0, 5)
    zs = np.geomspace(0.05, 40.0, n)
    for nu in nus:
        for j in (0, 1):
            iv = bessel_array("I", nu + j, zs)[0]
            kv = bessel_array("K", nu, zs)[0]
            ratio = float(np.max(iv * kv * (2.0 * nu)))
            rows.append({"nu": float(nu), "j": j, "ratio": ratio})
            if ratio > 1.0 + 1e-12:
                rows[-1]["violation"] = True
    return rows


def bound_check(lemma_id, **grids):
    """Numeric LHS/RHS ratio tables for the auxiliary integral estimates.

    PASS means every ratio is finite and, where an asymptotic parameter is
    sharpened (lambda decreasing or nu increasing), the ratios do not grow.
    For lem-ik the inequality is exact: every ratio must be <= 1."""
    dispatch = {
        "lem-jj": _bound_lem_jj,
        "lem-int-JJ": lambda **g: _bound_lem_int_jj(**g),
        "lem-int-JJ-prime": lambda **g: _bound_lem_int_jj(derivative_order=1, **g),
        "lem-mixed": _bound_lem_mixed,
        "lem-U": _bound_lem_u,
        "lem-M": _bound_lem_m,
        "lem-der-m": _bound_lem_der_m,
        "lem-der-u": _bound_lem_der_u,
        "lem-product": _bound_lem_product,
        "lem-jy0": _bound_lem_jy0,
        "lem-ik": _bound_lem_ik,
    }
    if lemma_id not in dispatch:
        raise ExpansionError(f"unknown lemma id {lemma_id!r}; "
                             f"choose from {BOUND_LEMMAS}")
    rows = dispatch[lemma_id](**grids)
    ratios = [row["ratio"] for row in rows]
    finite = all(np.isfinite(r) for r in ratios)
    ok = finite
    if lemma_id == "lem-ik":
        ok = finite and all(r <= 1.0 + 1e-12 for r in ratios)
    elif lemma_id in ("lem-jj", "lem-int-JJ", "lem-int-JJ-prime", "lem-mixed"):
        # grouped by part: ratios must not grow as lambda decreases (25%
        # slack for parts whose envelope is approached from below)
        by_part = {}
        for row in rows:
            by_part.setdefault(row.get("part", ""), []).append(
                (row["lambda"], row["ratio"]))
        for vals in by_part.values():
            vals.sort(key=lambda t: -t[0])
            for (l1, r1), (l2, r2) in zip(vals[:-1], vals[1:]):
                if r2 > r1 * 1.25 + 1e-12:
                    ok = False
    elif lemma_id == "lem-product":
        seq = [row["ratio"] for row in rows]
        ok = finite and all(b <= a * 1.3 for a, b in zip(seq[:-1], seq[1:]))
    elif lemma_id == "lem-jy0":
        ok = finite and all(r <= 2.0 for r in ratios)
    elif lemma_id in ("lem-M",):
        ok = finite and all(r <= 1.0 + 1e-12 for r in ratios)
    return {"lemma": lemma_id, "rows": rows, "pass": bool(ok)}


# ---------------------------------------------------------------------------
# Hardy-ratio probe

def hardy_ratio(field: gg.FieldDescriptor, width, center=0.0,
                gauge: Optional[gg.CorrectedGauge] = None,
                weight: Optional[str] = None) -> float:
    """Q[u] / int |u|^2 / w for a radial Gaussian trial of the given width
    centred at radius `center` (axisymmetric trial ring when center > 0).

    w is 1+|x|^2 for non-integer flux and 1+|x|^2 log^2|x| for integer;
    `weight` in {"power", "log"} overrides the flux-based choice (used to
    probe the absence of the power-weight bound at zero field)."""
    gauge = gauge or gg.CorrectedGauge(field)
    if weight is None:
        integer = abs(gauge.alpha - round(gauge.alpha)) < 1e-12
    else:
        integer = weight == "log"
    rmax = max(10.0 * width, center + 10.0 * width, 30.0)

    def u(r):
        return np.exp(-((np.asarray(r) - center) / width) ** 2)

    def du(r):
        return -2.0 * (np.asarray(r) - center) / width ** 2 * u(r)

    a_profile = _azimuthal_profile_any(field, gauge)

    def q_int(r):
        r = np.asarray(r)
        return (du(r) ** 2 + a_profile(r) ** 2 * u(r) ** 2) * r

    def d_int(r):
        r = np.asarray(r)
        if integer:
            w = 1.0 + r ** 2 * np.log(np.maximum(r, 1e-12)) ** 2
        else:
            w = 1.0 + r ** 2
        return u(r) ** 2 / w * r

    # dense log-grid trapezoid: the interpolated gauge profile has kinks
    # that defeat adaptive panels, and probe accuracy 1e-6 is ample
    rg = np.geomspace(1e-6, rmax, 4000)
    qv = float(np.trapezoid(q_int(rg), rg))
    dv = float(np.trapezoid(d_int(rg), rg))
    return qv / dv


def _azimuthal_profile_any(field, gauge):
    if field.radial is not None:
        grid = np.geomspace(1e-6, 400.0, 900)
        vals = _azimuthal_profile(field, grid)

        def prof(r):
            return np.interp(np.asarray(r), grid, vals)
        return prof

    def prof(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for i, ri in enumerate(r):
            x = np.array([ri, 0.0])
            out[i] = float(gauge(x) @ np.array([0.0, 1.0]))
        return out
    return prof


def hardy_sweep(field: gg.FieldDescriptor, widths, weight=None) -> np.ndarray:
    gauge = gg.CorrectedGauge(field)
    return np.array([hardy_ratio(field, w, gauge=gauge, weight=weight)
                     for w in widths])
