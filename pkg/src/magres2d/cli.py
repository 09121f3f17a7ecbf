"""Command-line front end.

Every run echoes the active configuration and its hash, so JSON outputs are
byte-identical across reruns.  Exit codes: 0 success, 1 a numerical check
failed (diagnostics on stdout), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import expansion as ex
from . import gauge as gg
from . import refop as ro
from . import timedecay as td
from .config import Config, DEFAULT
from .oracle import ode_green


def _emit_json(payload, cfg: Config):
    payload = dict(payload)
    payload["config"] = cfg.to_dict()
    payload["config_hash"] = cfg.hash()
    print(json.dumps(payload, sort_keys=True))


def _emit_csv(rows, header):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    sys.stdout.write(out.getvalue())


def _parse_field(spec: str) -> gg.FieldDescriptor:
    name, _, rest = spec.partition(":")
    vals = [float(x) for x in rest.split(",")] if rest else []
    if name == "gaussian":
        return gg.make_field("gaussian", amp=vals[0], width=vals[1] if len(vals) > 1 else 1.0)
    if name == "bump":
        return gg.make_field("bump", amp=vals[0], radius=vals[1] if len(vals) > 1 else 1.0)
    if name == "b0":
        return gg.make_field("b0", alpha=vals[0])
    if name == "zeroflux":
        return gg.make_field("zeroflux", amp=vals[0] if vals else 1.0)
    raise SystemExit(2)


def _cmd_mu(args, cfg):
    fp = ro.flux_params(args.alpha)
    k = fp.k_star[0] if len(fp.k_star) == 1 else list(fp.k_star)
    payload = {"alpha": args.alpha, "mu": fp.mu, "k_star": k,
               "integer_flux": fp.integer_flux}
    _emit_json(payload, cfg)
    return 0


def _cmd_kernel(args, cfg):
    pt = ro.spectral_point(args.alpha, args.lam, args.side)
    val = ro.channel_kernel(args.m, pt, args.r, args.rp, cfg).value
    payload = {"m": args.m, "lambda": args.lam, "side": "+i0" if args.side > 0 else "-i0",
               "r": args.r, "rp": args.rp, "re": val.real, "im": val.imag,
               "err": abs(val) * 1e-8}
    _emit_json(payload, cfg)
    return 0


def _cmd_oracle_check(args, cfg):
    pt = ro.spectral_point(args.alpha, args.lam, args.side)
    closed = ro.channel_kernel(args.m, pt, args.r, args.rp, cfg).value
    oracle = ode_green(args.m, args.alpha, args.lam, args.r, args.rp)
    rel = abs(closed - oracle) / max(abs(oracle), 1e-300)
    payload = {"m": args.m, "lambda": args.lam, "r": args.r, "rp": args.rp,
               "closed_re": closed.real, "closed_im": closed.imag,
               "oracle_re": oracle.real, "oracle_im": oracle.imag,
               "relative_diff": rel, "pass": bool(rel <= 1e-6)}
    _emit_json(payload, cfg)
    return 0 if rel <= 1e-6 else 1


def _cmd_threshold_fit(args, cfg):
    lams = np.geomspace(args.lmin, args.lmax, args.points)
    fit1, fit2 = ex.threshold_fit(args.alpha, args.s, lams, cfg=cfg)
    if args.csv:
        grid = ex.radial_grid(cfg)
        rows = []
        for lam in lams:
            d0, d1 = ex.remainder_norms_both(args.alpha, lam, args.s, grid=grid, cfg=cfg)
            rows.append([lam, max(d0.values()), max(d1.values())])
        _emit_csv(rows, ["lambda", "norm_first", "norm_remainder"])
        return 0
    mu = ro.flux_params(args.alpha).mu
    ok = abs(fit1.exponent - mu) <= 0.05 and fit2.exponent >= mu + 0.1
    _emit_json({"alpha": args.alpha, "s": args.s, "mu": mu,
                "exponent_first": fit1.exponent, "r_squared": fit1.r_squared,
                "exponent_remainder": fit2.exponent, "pass": bool(ok)}, cfg)
    return 0 if ok else 1


def _cmd_integer_fit(args, cfg):
    lams = np.geomspace(args.lmin, args.lmax, args.points)
    plat, rem, lams = ex.integer_threshold_fit(args.alpha, args.s, lams, cfg=cfg)
    last = plat[:len(plat) // 2]
    variation = (last.max() - last.min()) / last.mean()
    ok = variation <= 0.10
    if args.csv:
        _emit_csv([[l, p, r] for l, p, r in zip(lams, plat, rem)],
                  ["lambda", "plateau", "remainder_scaled"])
        return 0 if ok else 1
    _emit_json({"alpha": args.alpha, "s": args.s, "plateau": list(plat),
                "remainder_scaled": list(rem), "lambda": list(lams),
                "plateau_variation": variation, "pass": bool(ok)}, cfg)
    return 0 if ok else 1


def _cmd_decay_fit(args, cfg):
    fp = ro.flux_params(args.alpha)
    m = args.m if args.m is not None else fp.k_star[0]
    state = td.make_state(m, s=args.s)
    prop = td.ChannelPropagator(args.alpha, state, state, cfg=cfg)
    ts = np.geomspace(args.t_min, args.t_max, args.points)
    els = [prop.element(t) for t in ts]
    if args.csv:
        _emit_csv([[e.t, e.value.real, e.value.imag, abs(e.value), e.quadrature_error]
                   for e in els], ["t", "re", "im", "abs", "quad_err"])
        return 0
    vals = [e.value for e in els]
    fit = td.decay_fit(ts, vals, model="power")
    payload = {"alpha": args.alpha, "m": m, "s": args.s,
               "exponent": fit.exponent,
               "coefficient_re": fit.coefficient.real,
               "coefficient_im": fit.coefficient.imag,
               "r_squared": fit.r_squared, "model": fit.model}
    if fp.integer_flux:
        payload["law_residual_ratio"] = td.residual_ratio(ts, vals, law_exponent=1.0)
        payload["pass"] = bool(payload["law_residual_ratio"] < 0.5)
    else:
        payload["pass"] = bool(abs(fit.exponent - (1.0 + fp.mu)) <= 0.1)
    _emit_json(payload, cfg)
    return 0 if payload["pass"] else 1


def _cmd_gauge_check(args, cfg):
    fld = _parse_field(args.field)
    try:
        rep = gg.gauge_report(fld, seed=cfg.seed)
    except gg.GaugeError as exc:
        _emit_json({"field": args.field, "error": str(exc), "pass": False}, cfg)
        return 1
    payload = {"field": args.field, **rep.to_dict(), "pass": True}
    _emit_json(payload, cfg)
    return 0


def _cmd_perturbed(args, cfg):
    fld = _parse_field(args.field)
    V = (lambda r: args.v_amp / (1.0 + np.asarray(r)) ** 4) if args.v_amp else None
    m_set = [int(x) for x in args.m_set.split(",")]
    systems = ex.nystrom_perturbed(args.alpha, fld, V, args.s, m_set, cfg=cfg)
    out = {}
    ok = True
    for m, S in systems.items():
        n = len(S.grid.r)
        A = np.eye(n) + S.g0 * S.t_diag[None, :]
        resid = float(np.linalg.norm(A @ S.f0 - S.g0) / np.linalg.norm(S.g0))
        B = np.eye(n) + S.t_diag[:, None] * S.g0
        dual = float(np.linalg.norm(S.t_diag[:, None] * S.f0
                                    - np.linalg.solve(B, S.t_diag[:, None] * S.g0))
                     / max(np.linalg.norm(S.t_diag[:, None] * S.f0), 1e-300))
        ok &= resid <= 1e-10 and dual <= 1e-10 and S.margin > 1e-6
        out[str(m)] = {"margin": S.margin, "identity_residual": resid,
                       "duality_residual": dual}
    _emit_json({"alpha": args.alpha, "channels": out, "pass": bool(ok)}, cfg)
    return 0 if ok else 1


def _cmd_bounds(args, cfg):
    ids = ex.BOUND_LEMMAS if args.lemma == "all" else (args.lemma,)
    results = {}
    ok = True
    for lem in ids:
        res = ex.bound_check(lem)
        ok &= res["pass"]
        results[lem] = {"pass": res["pass"],
                        "max_ratio": max(r["ratio"] for r in res["rows"])}
    _emit_json({"lemmas": results, "pass": bool(ok)}, cfg)
    return 0 if ok else 1


def _cmd_hardy(args, cfg):
    fld = _parse_field(args.field)
    widths = [float(x) for x in args.widths.split(",")]
    ratios = ex.hardy_sweep(fld, widths, weight=args.weight)
    _emit_json({"field": args.field, "widths": widths,
                "ratios": [float(r) for r in ratios]}, cfg)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="magres2d",
                                description="Resolvent kernels, threshold laws and "
                                            "time decay for 2D magnetic Schrodinger "
                                            "operators")
    p.add_argument("--config", help="JSON config file")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("mu", help="flux parameters")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_mu)

    q = sub.add_parser("kernel", help="channel resolvent kernel value")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--lambda", dest="lam", type=float, required=True)
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--rp", type=float, required=True)
    q.add_argument("--side", type=int, default=1, choices=(1, -1))
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_kernel)

    q = sub.add_parser("oracle-check", help="closed form vs ODE shooting")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--lambda", dest="lam", type=float, required=True)
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--rp", type=float, required=True)
    q.add_argument("--side", type=int, default=1, choices=(1, -1))
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_oracle_check)

    q = sub.add_parser("threshold-fit", help="non-integer threshold law")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--s", type=float, default=1.7)
    q.add_argument("--lmin", type=float, default=1e-8)
    q.add_argument("--lmax", type=float, default=1e-3)
    q.add_argument("--points", type=int, default=8)
    q.add_argument("--json", action="store_true")
    q.add_argument("--csv", action="store_true")
    q.set_defaults(fn=_cmd_threshold_fit)

    q = sub.add_parser("integer-fit", help="integer-flux log law")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--s", type=float, default=1.7)
    q.add_argument("--lmin", type=float, default=1e-10)
    q.add_argument("--lmax", type=float, default=1e-6)
    q.add_argument("--points", type=int, default=8)
    q.add_argument("--json", action="store_true")
    q.add_argument("--csv", action="store_true")
    q.set_defaults(fn=_cmd_integer_fit)

    q = sub.add_parser("decay-fit", help="time-decay law fit")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--m", type=int, default=None)
    q.add_argument("--s", type=float, default=2.6)
    q.add_argument("--t-min", type=float, default=1e2)
    q.add_argument("--t-max", type=float, default=1e4)
    q.add_argument("--points", type=int, default=9)
    q.add_argument("--json", action="store_true")
    q.add_argument("--csv", action="store_true")
    q.set_defaults(fn=_cmd_decay_fit)

    q = sub.add_parser("gauge-check", help="vector-potential consistency report")
    q.add_argument("--field", required=True,
                   help="gaussian:amp,width | bump:amp,radius | b0:alpha | zeroflux")
    q.add_argument("--radii", default="10,100", help="decay sampling bounds")
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_gauge_check)

    q = sub.add_parser("perturbed", help="Nystrom perturbed coefficients")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--field", required=True)
    q.add_argument("--v-amp", type=float, default=0.0)
    q.add_argument("--s", type=float, default=1.7)
    q.add_argument("--m-set", default="0")
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_perturbed)

    q = sub.add_parser("bounds", help="auxiliary integral-estimate checks")
    q.add_argument("--lemma", default="all",
                   choices=("all",) + ex.BOUND_LEMMAS)
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_bounds)

    q = sub.add_parser("hardy", help="Hardy-ratio trial sweep")
    q.add_argument("--field", required=True)
    q.add_argument("--widths", default="2,4,8,16")
    q.add_argument("--weight", default=None, choices=(None, "power", "log"))
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=_cmd_hardy)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = Config.from_file(args.config) if args.config else DEFAULT
    try:
        return args.fn(args, cfg)
    except (ro.RefOpError, ex.ExpansionError, gg.GaugeError, td.TimeDecayError) as exc:
        print(json.dumps({"error": str(exc), "pass": False}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
