"""``monoloc`` command line: named experiments writing CSV/JSON artifacts.

Exit status: 0 when every check of the command passes, 1 on a failed
check, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import cocycle as C
from . import ids as I
from . import ldt as L
from . import spectral as S
from . import verify as V
from .arithmetic import (DiophantineParams, diophantine_check, er_estimate, er_tail, gap_structure,
                         good_denominators, parse_frequency)
from .config import PRESETS, load
from .emit import emit_plotdata, write_json
from .errors import ConfigError, MonolocError
from .operator import build
from .parallel import set_threads


def _common(p):
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", help="INI file overlaid on the preset")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--freq")
    p.add_argument("--potential")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--E", type=float)
    p.add_argument("--depth", type=int)
    p.add_argument("--scales", help="comma separated convergent denominators")
    p.add_argument("--seed", type=int)
    p.add_argument("--gnuplot", action="store_true", default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="monoloc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of a box, optionally eigencurves")
    _common(p)
    p.add_argument("--n", type=int, default=89)
    p.add_argument("--bc", choices=["dirichlet", "periodic"], default="periodic")
    p.add_argument("--curves", action="store_true", help="sample periodic eigencurves over the phase")

    p = sub.add_parser("ids", help="IDS table and Lipschitz report")
    _common(p)

    p = sub.add_parser("lyapunov", help="gamma_n curve and lower-bound check")
    _common(p)
    p.add_argument("--points", type=int, default=50)

    p = sub.add_parser("thouless", help="Thouless formula against gamma_n")
    _common(p)
    p.add_argument("--points", type=int, default=50)

    p = sub.add_parser("ldt", help="deviation sets across scales")
    _common(p)

    p = sub.add_parser("localize", help="eigenpair decay suite")
    _common(p)
    p.add_argument("--n", type=int)

    p = sub.add_parser("arith", help="convergents, gaps, Diophantine report")
    _common(p)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--horizon", type=int, default=10_000)

    p = sub.add_parser("verify", help="run the acceptance suite")
    _common(p)
    p.add_argument("--only", nargs="*", help="criterion ids or prefixes (e.g. AC01)")
    return ap


def resolve(args):
    cfg = load(args.config, args.preset)
    kw = {}
    for arg, attr in (("freq", "freq"), ("potential", "potential"), ("lam", "lam"), ("x", "x"),
                      ("E", "E"), ("depth", "depth"), ("seed", "seed"), ("out", "out"),
                      ("gnuplot", "gnuplot")):
        v = getattr(args, arg, None)
        if v is not None:
            kw[attr] = v
    if args.scales:
        try:
            kw["scales"] = tuple(int(s) for s in args.scales.split(","))
        except ValueError:
            raise ConfigError(f"bad --scales {args.scales!r}") from None
    if "freq" in kw and "scales" not in kw and kw["freq"] != cfg.freq:
        # default scales belong to the old frequency: pick three of the new convergents
        try:
            qs = parse_frequency(kw["freq"]).cf(kw.get("depth", cfg.depth)).q
        except ValueError as e:
            raise ConfigError(str(e)) from None
        kw["scales"] = tuple(s for s in qs if s >= 10)[:3]
    return cfg.with_(**kw)


# ----------------------------------------------------------------- commands

def cmd_spectrum(cfg, args, out):
    sp = cfg.operator()
    s = S.spectrum(build(sp, args.n, args.bc), cfg.eig_tol)
    rows = [{"index": i, "E": e} for i, e in enumerate(s.eigenvalues)]
    summary = {"n": args.n, "bc": args.bc, "count": len(rows),
               "min": float(s.eigenvalues[0]), "max": float(s.eigenvalues[-1])}
    ok = True
    emit_plotdata(out, "spectrum", rows, gnuplot=cfg.gnuplot)
    if args.curves:
        curves, rep = S.eigencurves(sp, args.n, tol=cfg.eig_tol, strict=False)
        crow = [{"level": c.level, "x": x, "mu": m, "is_left_limit": f}
                for c in curves for x, m, f in c.samples]
        emit_plotdata(out, "curves", crow, gnuplot=cfg.gnuplot)
        summary["curves"] = {"slope_min": rep.slope_min, "slope_max": rep.slope_max,
                             "slope_bounds": list(rep.slope_bounds),
                             "slope_violations": rep.slope_violations,
                             "interlace_violations": rep.interlace_violations,
                             "jump_sign_violations": rep.jump_sign_violations}
        ok = rep.ok
    write_json(os.path.join(out, "summary.json"), summary)
    print(f"{len(rows)} eigenvalues in [{summary['min']:.6f}, {summary['max']:.6f}]")
    return ok


def cmd_ids(cfg, args, out):
    sp = cfg.operator()
    tab = I.ids_estimate(sp, cfg.ids_n, I.default_grid(sp, cfg.dE), cfg.phases, cfg.ids_bc, cfg.eig_tol)
    summary = {"n": cfg.ids_n, "samples": cfg.phases, "bc": cfg.ids_bc, "dE": cfg.dE}
    ok = True
    if sp.lam > 0:
        r = I.lipschitz_modulus(tab)
        summary["lipschitz"] = {"max_slope": r.max_slope, "bound": r.bound, "slack": r.slack,
                                "rho": r.rho, "at": r.at, "pass": r.passed}
        ok = r.passed
        m = I.spectrum_measure(tab)
        summary["measure"] = {"value": m.measure, "lower": m.lower, "upper": m.upper}
        print(f"max slope {r.max_slope:.6f}  bound {r.bound:.6f}  {'PASS' if ok else 'FAIL'}")
    emit_plotdata(out, "ids", list(tab.rows()), summary, cfg.gnuplot)
    return ok


def _energies(cfg, args):
    sp = cfg.operator()
    if args.E is not None:
        return np.array([cfg.E])
    return V.mid_grid(sp.lam, args.points)


def cmd_lyapunov(cfg, args, out):
    sp = cfg.operator()
    Es = _energies(cfg, args)
    curve = C.lyapunov_finite(sp, cfg.lyap_n, Es, C.Sampling(cfg.sampling, cfg.windows))
    bound = V.lyapunov_bound(sp)
    ok = bool(np.all(curve.gamma >= bound - 0.05))
    summary = {"n": cfg.lyap_n, "sampling": curve.sampling, "bound": bound,
               "min_gamma": float(curve.gamma.min()), "pass": ok}
    emit_plotdata(out, "lyapunov", list(curve.rows()), summary, cfg.gnuplot)
    if len(Es) == 1:
        print(f"gamma_{cfg.lyap_n}({Es[0]:g}) = {curve.gamma[0]:.6f}")
    else:
        print(f"min gamma {curve.gamma.min():.6f} vs bound {bound:.6f}  {'PASS' if ok else 'FAIL'}")
    return ok


def cmd_thouless(cfg, args, out):
    sp = cfg.operator()
    Es = _energies(cfg, args)
    g = C.lyapunov_finite(sp, cfg.lyap_n, Es, C.Sampling(cfg.sampling, cfg.windows)).gamma
    tab = I.ids_estimate(sp, cfg.ids_n, I.default_grid(sp, cfg.dE), cfg.phases, cfg.ids_bc, cfg.eig_tol)
    th = np.atleast_1d(C.thouless(tab, Es))
    rows = [{"E": e, "thouless": t, "gamma_n": y, "diff": abs(t - y)} for e, t, y in zip(Es, th, g)]
    diff = max(r["diff"] for r in rows)
    ok = diff <= 0.05
    emit_plotdata(out, "thouless", rows, {"max_diff": diff, "pass": ok}, cfg.gnuplot)
    print(f"max |thouless - gamma_n| = {diff:.6f}  {'PASS' if ok else 'FAIL'}")
    return ok


def cmd_ldt(cfg, args, out):
    sp = cfg.operator(x=0.0)
    E = cfg.E
    g = C.gamma_n(sp, cfg.lyap_n, E, C.Sampling(cfg.sampling, cfg.windows))
    reps = [L.deviation_set(sp, q, E, cfg.ldt_delta * g, max(cfg.ldt_grid, 100 * q), g)
            for q in cfg.scales]
    meas = [r.measure for r in reps]
    ok = all(a > b for a, b in zip(meas, meas[1:])) and all(r.covering_ok for r in reps)
    summary = {"E": E, "gamma": g, "delta_fraction": cfg.ldt_delta,
               "scales": [r.summary() for r in reps], "log_slope": L.log_measure_slope(reps),
               "pass": ok}
    os.makedirs(out, exist_ok=True)
    write_json(os.path.join(out, "ldt.json"), summary)
    for r in reps:
        print(f"q={r.qk:4d}  measure={r.measure:.3e}  intervals={r.intervals}")
    return ok


def cmd_localize(cfg, args, out):
    n = args.n or cfg.loc_n
    batch, mid, fits, gam, rows = V.localization_suite(cfg, n=n)
    elig = [f for f in fits if f.points > 0]
    good = [f for f, ge in zip(fits, gam) if f.points > 0 and f.verdict == "localized"
            and f.rate >= (1 - cfg.loc_delta) * ge]
    frac = len(good) / len(elig) if elig else 0.0
    ok = frac >= 0.9
    summary = {"n": n, "pairs": len(batch.pairs), "skipped": len(batch.skipped),
               "mid_pairs": len(mid), "eligible": len(elig), "localized": len(good),
               "fraction": frac, "pass": ok}
    emit_plotdata(out, "pairs", rows, summary, cfg.gnuplot)
    print(f"{len(good)}/{len(elig)} eligible mid-spectrum pairs localized  {'PASS' if ok else 'FAIL'}")
    return ok


def cmd_arith(cfg, args, out):
    alpha = cfg.frequency
    cf = alpha.cf(cfg.depth)
    rows = []
    for k in range(1, cfg.depth):
        if cf.q[k] > 10**6:
            break
        g = gap_structure(cf, k, alpha)
        rows.append({"k": k, "q_k": cf.q[k], "p_k": cf.p[k], "large_len": g.large_len,
                     "large_count": g.large_count,
                     "small_len": math.nan if g.small_len is None else g.small_len,
                     "small_count": g.small_count})
    d = diophantine_check(cf, DiophantineParams(1e-12, args.tau, args.horizon), alpha)
    summary = {"freq": cfg.freq, "depth": cfg.depth, "coefficients": list(cf.coeffs),
               "q": [int(q) for q in cf.q], "er_min": er_estimate(cf) if cf.depth >= 4 else None,
               "er_tail": er_tail(cf) if cf.depth >= 4 else None,
               "good_denominators_0.4": [int(q) for q in good_denominators(cf, 0.4)],
               "diophantine": {"tau": args.tau, "horizon": args.horizon,
                               "best_constant": d.worst_ratio, "worst_n": d.worst_n}}
    emit_plotdata(out, "gaps", rows, summary, cfg.gnuplot)
    print(" k        q_k   large x count      small x count")
    for r in rows:
        small = "" if math.isnan(r["small_len"]) else f"{r['small_len']:.3e} x {r['small_count']}"
        print(f"{r['k']:2d} {r['q_k']:10d}   {r['large_len']:.3e} x {r['large_count']:<6d} {small}")
    return True


def cmd_verify(cfg, args, out):
    t0 = time.perf_counter()
    res = V.run_all(cfg, args.only, log=print)
    os.makedirs(out, exist_ok=True)
    doc = {"preset": cfg.preset, "criteria": [{"id": r.id, "pass": r.passed, "detail": r.detail}
                                              for r in res],
           "all_pass": all(r.passed for r in res)}
    write_json(os.path.join(out, "verify.json"), doc)
    write_json(os.path.join(out, "timings.json"),
               {"threads": args.threads, "total_seconds": time.perf_counter() - t0,
                "seconds": {r.id: r.seconds for r in res}})
    return doc["all_pass"]


COMMANDS = {"spectrum": cmd_spectrum, "ids": cmd_ids, "lyapunov": cmd_lyapunov,
            "thouless": cmd_thouless, "ldt": cmd_ldt, "localize": cmd_localize,
            "arith": cmd_arith, "verify": cmd_verify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = resolve(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    set_threads(args.threads)
    out = os.path.join(cfg.out, args.command) if args.out is None else args.out
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "resolved-config.ini"), "w") as fh:
        fh.write(cfg.to_ini())
    try:
        ok = COMMANDS[args.command](cfg, args, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (MonolocError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
