"""Independent brute-force references: a shooting-method Green's function for
each partial-wave channel, and extended-precision series values.

The ODE route never touches the closed-form kernel machinery: the radial
equation is integrated directly (DOP853), with a log-radius substitution
inside the unit disc taming the r^-2 potential, a Frobenius series start at
r0 = 1e-4, and an asymptotic (Hankel-type outgoing for lambda > 0, K-type
decaying for lambda < 0) seed at the far end.  Boundary values on the
positive real axis are obtained by Richardson extrapolation in the
artificial imaginary part eps -> 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

import mpmath as mp


class OracleError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# radial ODE machinery

def _potential_out(m, alpha, r):
    # r >= 1: ((m+alpha)^2 - 1/4) / r^2
    return (((m + alpha) ** 2) - 0.25) / (r * r)


def _frobenius_seed(m, alpha, lam, r0, nterms=6):
    """Regular solution f ~ r^{|m|+1/2} sum c_k r^k and df/dr at r0."""
    sig = abs(m) + 0.5
    c = [1.0 + 0.0j]
    for k in range(1, nterms):
        prev1 = c[k - 1]
        prev2 = c[k - 2] if k >= 2 else 0.0
        c.append((2.0 * m * alpha * prev1 + (alpha * alpha - lam) * prev2)
                 / (k * (2.0 * abs(m) + k)))
    f = sum(ck * r0 ** (sig + k) for k, ck in enumerate(c))
    fp = sum((sig + k) * ck * r0 ** (sig + k - 1) for k, ck in enumerate(c))
    return f, fp


def _asym_outgoing_seed(m, alpha, lam, R):
    """sqrt(r) H^(1)-type solution and derivative at R, from the multi-term
    Hankel asymptotic series (lambda may be complex, Im sqrt >= 0)."""
    nu = abs(m + alpha)
    sq = np.sqrt(complex(lam))
    if sq.imag < 0:
        sq = -sq
    x = sq * R
    mu4 = 4.0 * nu * nu
    s = 1.0 + 0.0j
    sp = 0.0 + 0.0j  # x * dS/dx accumulated as sum of -k c_k
    c = 1.0 + 0.0j
    for k in range(1, 14):
        c = c * 1j * (mu4 - (2 * k - 1) ** 2) / (8.0 * x * k)
        s += c
        sp += -k * c
        if abs(c) < 1e-18:
            break
    pref = np.sqrt(2.0 / (np.pi * sq))
    phase = np.exp(1j * (x - nu * np.pi / 2.0 - np.pi / 4.0))
    val = pref * phase * s
    dval = pref * phase * (1j * sq * s + sq * sp / x)
    return val, dval


def _asym_decaying_seed(m, alpha, lam, R):
    """sqrt(r) K-type decaying solution and derivative at R for lam < 0."""
    nu = abs(m + alpha)
    kt = math.sqrt(-lam.real) if isinstance(lam, complex) else math.sqrt(-lam)
    x = kt * R
    mu4 = 4.0 * nu * nu
    s = 1.0
    sp = 0.0
    c = 1.0
    for k in range(1, 14):
        c = c * (mu4 - (2 * k - 1) ** 2) / (8.0 * x * k)
        s += c
        sp += -k * c
        if abs(c) < 1e-18:
            break
    pref = math.sqrt(math.pi / (2.0 * kt))
    val = pref * math.exp(-x) * s
    dval = pref * math.exp(-x) * kt * (-s + sp / x)
    return complex(val), complex(dval)


class _ChannelSolution:
    """Regular and outgoing/decaying solutions of one channel at complex
    lambda, with values stored at the radii requested up front."""

    R0 = 1e-4

    def __init__(self, m, alpha, lam, radii, rtol=1e-11, atol=1e-13):
        self.m, self.alpha, self.lam = m, alpha, complex(lam)
        radii = np.unique(np.asarray(radii, dtype=float))
        if np.any(radii < 1e-3) or np.any(radii > 50.0):
            raise OracleError("oracle radii restricted to [1e-3, 50]")
        self.radii = radii
        absl = abs(self.lam)
        if not (1e-9 <= absl <= 10.0 + 1e-9):
            raise OracleError("oracle |lambda| restricted to [1e-8, 10]")
        self.R = max(50.0, 40.0 / math.sqrt(absl))
        self._integrate(rtol, atol)

    # -- inside the disc the equation is integrated in x = log r:
    #    w'' = [(m + alpha e^x)^2 - lam e^{2x}] w,  f = sqrt(r) w
    def _rhs_log(self, x, y):
        r = math.exp(x)
        q = (self.m + self.alpha * r) ** 2 - self.lam * r * r
        return [y[1], q * y[0]]

    def _rhs_out(self, r, y):
        q = _potential_out(self.m, self.alpha, r) - self.lam
        return [y[1], q * y[0]]

    def _integrate(self, rtol, atol):
        m, alpha, lam = self.m, self.alpha, self.lam
        inner = self.radii[self.radii < 1.0]
        outer = self.radii[self.radii >= 1.0]

        # regular solution, outward
        f0, fp0 = _frobenius_seed(m, alpha, lam, self.R0)
        x0 = math.log(self.R0)
        w0 = f0 / math.sqrt(self.R0)
        wp0 = fp0 * math.sqrt(self.R0) - 0.5 * w0
        xs = np.log(inner) if inner.size else np.array([])
        sol_in = solve_ivp(self._rhs_log, (x0, 0.0), np.array([w0, wp0], dtype=complex),
                           t_eval=np.concatenate([np.sort(xs), [0.0]]),
                           method="DOP853", rtol=rtol, atol=atol)
        if not sol_in.success:
            raise OracleError(f"regular solution failed: {sol_in.message}")
        w1, wp1 = sol_in.y[0, -1], sol_in.y[1, -1]
        freg_1, fregp_1 = w1, 0.5 * w1 + wp1  # f(1), f'(1)
        self._freg = {}
        for x, w in zip(sol_in.t[:-1], sol_in.y[0, :-1]):
            self._freg[round(float(np.exp(x)), 12)] = w * math.exp(0.5 * x)
        if outer.size:
            sol_out = solve_ivp(self._rhs_out, (1.0, self.R * 1.0000001),
                                np.array([freg_1, fregp_1]),
                                t_eval=np.sort(outer), method="DOP853",
                                rtol=rtol, atol=atol)
            if not sol_out.success:
                raise OracleError(f"regular outward failed: {sol_out.message}")
            for r, f in zip(sol_out.t, sol_out.y[0]):
                self._freg[round(float(r), 12)] = f
        self._freg[1.0] = freg_1
        self.freg_1, self.fregp_1 = freg_1, fregp_1

        # outgoing/decaying solution, inward
        if lam.imag > 1e-14 or lam.real > 0.0:
            phiR, phipR = _asym_outgoing_seed(m, alpha, lam, self.R)
        else:
            phiR, phipR = _asym_decaying_seed(m, alpha, lam, self.R)
        stops = np.unique(np.concatenate([outer, [1.0]]))[::-1]
        sol_phi = solve_ivp(self._rhs_out, (self.R, 1.0),
                            np.array([phiR, phipR], dtype=complex),
                            t_eval=stops, method="DOP853", rtol=rtol, atol=atol)
        if not sol_phi.success:
            raise OracleError(f"outgoing inward failed: {sol_phi.message}")
        self._phi = {}
        for r, f in zip(sol_phi.t, sol_phi.y[0]):
            self._phi[round(float(r), 12)] = f
        phi1, phip1 = sol_phi.y[0, -1], sol_phi.y[1, -1]
        if inner.size:
            w1 = phi1
            wp1 = phip1 - 0.5 * phi1
            sol_phi_in = solve_ivp(self._rhs_log, (0.0, math.log(inner.min())),
                                   np.array([w1, wp1], dtype=complex),
                                   t_eval=np.sort(np.log(inner))[::-1],
                                   method="DOP853", rtol=rtol, atol=atol)
            if not sol_phi_in.success:
                raise OracleError(f"outgoing inner failed: {sol_phi_in.message}")
            for x, w in zip(sol_phi_in.t, sol_phi_in.y[0]):
                self._phi[round(float(np.exp(x)), 12)] = w * math.exp(0.5 * x)

        self.wronskian = phi1 * fregp_1 - phip1 * freg_1
        if abs(self.wronskian) < 1e-12:
            raise OracleError("resonant configuration: Wronskian below 1e-12")

    def freg(self, r):
        return self._freg[round(float(r), 12)]

    def phi(self, r):
        return self._phi[round(float(r), 12)]

    def green(self, r, rp):
        lo, hi = (r, rp) if r <= rp else (rp, r)
        return self.freg(lo) * self.phi(hi) / self.wronskian / math.sqrt(r * rp)


@dataclass
class OdeSolution:
    """Regular channel solution on a grid (f and df/dr)."""
    m: int
    lam: complex
    grid: np.ndarray
    f: np.ndarray
    fp: np.ndarray


def regular_solution(m, alpha, lam, grid, rtol=1e-11, atol=1e-13) -> OdeSolution:
    """Integrate the regular solution outward and return it on `grid`."""
    grid = np.asarray(grid, dtype=float)
    lamc = complex(lam)
    f0, fp0 = _frobenius_seed(m, alpha, lamc, _ChannelSolution.R0)
    inner = grid[grid < 1.0]
    outer = grid[grid >= 1.0]
    fvals = np.empty(grid.size, dtype=complex)
    fpvals = np.empty(grid.size, dtype=complex)

    def rhs_log(x, y):
        r = math.exp(x)
        q = (m + alpha * r) ** 2 - lamc * r * r
        return [y[1], q * y[0]]

    def rhs_out(r, y):
        q = _potential_out(m, alpha, r) - lamc
        return [y[1], q * y[0]]

    x0 = math.log(_ChannelSolution.R0)
    w0 = f0 / math.sqrt(_ChannelSolution.R0)
    wp0 = fp0 * math.sqrt(_ChannelSolution.R0) - 0.5 * w0
    t_eval = np.concatenate([np.sort(np.log(inner)), [0.0]])
    sol = solve_ivp(rhs_log, (x0, 0.0), np.array([w0, wp0], dtype=complex),
                    t_eval=t_eval, method="DOP853", rtol=rtol, atol=atol)
    table = {}
    for x, w, wp in zip(sol.t[:-1], sol.y[0, :-1], sol.y[1, :-1]):
        r = math.exp(x)
        table[round(r, 12)] = (w * math.sqrt(r), (0.5 * w + wp) / math.sqrt(r))
    f1 = sol.y[0, -1]
    fp1 = 0.5 * sol.y[0, -1] + sol.y[1, -1]
    table[1.0] = (f1, fp1)
    if outer.size:
        sol2 = solve_ivp(rhs_out, (1.0, float(outer.max()) * 1.0001 + 1e-9),
                         np.array([f1, fp1], dtype=complex), t_eval=np.sort(outer),
                         method="DOP853", rtol=rtol, atol=atol)
        for r, f, fp in zip(sol2.t, sol2.y[0], sol2.y[1]):
            table[round(float(r), 12)] = (f, fp)
    for i, r in enumerate(grid):
        fvals[i], fpvals[i] = table[round(float(r), 12)]
    return OdeSolution(m=m, lam=lamc, grid=grid, f=fvals, fp=fpvals)


_CACHE: dict = {}


def channel_solution(m, alpha, lam, radii) -> _ChannelSolution:
    key = (m, round(float(alpha), 14), complex(lam), tuple(np.round(radii, 12)))
    hit = _CACHE.get(key)
    if hit is None:
        hit = _ChannelSolution(m, alpha, lam, radii)
        if len(_CACHE) > 512:
            _CACHE.clear()
        _CACHE[key] = hit
    return hit


def ode_green(m, alpha, lam, r, rp, eps_pair=(1e-4, 1e-5)):
    """Channel Green's function R_0^m(lam; r, rp) by direct integration.

    For real lam > 0 the +i0 boundary value is obtained by evaluating at
    lam + i*eps for the two eps in `eps_pair` and extrapolating linearly
    to eps = 0.  Complex lam (Im > 0) and real lam < 0 are evaluated
    directly.
    """
    lam = complex(lam)
    if lam.imag < 0:
        raise OracleError("ode_green: need Im(lambda) >= 0")
    if not (1e-9 <= abs(lam) <= 10.0 + 1e-9):
        raise OracleError("ode_green: |lambda| restricted to [1e-8, 10]")
    radii = [r, rp]
    if lam.imag > 0 or lam.real < 0:
        return channel_solution(m, alpha, lam, radii).green(r, rp)
    e1, e2 = eps_pair
    v1 = channel_solution(m, alpha, lam + 1j * e1, radii).green(r, rp)
    v2 = channel_solution(m, alpha, lam + 1j * e2, radii).green(r, rp)
    return (e1 * v2 - e2 * v1) / (e1 - e2)


# ---------------------------------------------------------------------------
# extended-precision series references

def series_reference(kind, **params):
    """Extended-precision (30+ digits) reference values.

    kinds: 'kummer_m' (a, b, z, terms), 'bessel_j_series' (nu, z, terms),
    'gamma_integral' (x).  Returns an mpmath mpf/mpc.
    """
    with mp.workdps(40):
        if kind == "kummer_m":
            a, b, z = params["a"], params["b"], params["z"]
            terms = params.get("terms", 200)
            a, z = mp.mpmathify(a), mp.mpmathify(z)
            b = mp.mpf(b)
            term = mp.mpf(1)
            total = mp.mpf(1)
            for n in range(terms):
                term = term * (a + n) / (b + n) * z / (n + 1)
                total += term
            if abs(term) > mp.mpf("1e-35") * abs(total):
                raise OracleError("kummer_m reference: series not converged")
            return total
        if kind == "bessel_j_series":
            nu, z = mp.mpf(params["nu"]), mp.mpf(params["z"])
            terms = params.get("terms", 200)
            total = mp.mpf(0)
            for k in range(terms):
                total += (-1) ** k * (z / 2) ** (nu + 2 * k) / (mp.factorial(k) * mp.gamma(nu + k + 1))
            return total
        if kind == "gamma_integral":
            x = mp.mpf(params["x"])
            head = mp.quad(lambda t: t ** (x - 1) * mp.e ** (-t), [0, 1])
            tail = mp.quad(lambda t: t ** (x - 1) * mp.e ** (-t), [1, mp.inf])
            return head + tail
    raise OracleError(f"unknown series_reference kind {kind!r}")
