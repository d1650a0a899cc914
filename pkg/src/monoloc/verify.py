"""The acceptance suite: one function per criterion, shared by the CLI and the tests.

Each check returns a :class:`CriterionResult` whose ``detail`` holds only
deterministic numbers; wall-clock times are reported separately.
"""
from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import cocycle as C
from . import ids as I
from . import ldt as L
from . import localization as Lo
from . import spectral as S
from .arithmetic import er_tail
from .errors import ConditioningError
from .operator import BC, build, jump_perturbation
from .parallel import get_threads, set_threads
from .potential import OperatorSpec


@dataclass
class CriterionResult:
    id: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"{self.id}: {'PASS' if self.passed else 'FAIL'}"


def _warm():
    # trigger compilation outside timed sections
    sp = OperatorSpec.parse("golden", 1.0, "sawtooth", 0.1)
    for bc in ("dirichlet", "periodic"):
        S.spectrum(build(sp, 6, bc))
    C.lyapunov_finite(sp, 4, [0.0])
    C.lyapunov_finite(sp, 4, [0.0], C.Sampling("grid", 2))


# ------------------------------------------------------------------ AC01

def ac01_free_chain(cfg):
    sizes = (5, 200, 2000)
    _warm()
    sp = cfg.operator(lam=0.0, x=0.0)
    t0 = time.perf_counter()
    err = {}
    for n in sizes:
        d = S.spectrum(build(sp, n, BC.DIRICHLET), 1e-10).eigenvalues
        p = S.spectrum(build(sp, n, BC.PERIODIC), 1e-10).eigenvalues
        ed = np.sort(2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))
        ep = np.sort(2 * np.cos(2 * np.pi * np.arange(n) / n))
        err[f"dirichlet_{n}"] = float(np.max(np.abs(d - ed)))
        err[f"periodic_{n}"] = float(np.max(np.abs(p - ep)))
    elapsed = time.perf_counter() - t0
    worst = max(err.values())
    return CriterionResult("AC01-free-chain", worst <= 1e-10 and elapsed < 5.0,
                           {"max_error": worst, "errors": err, "runtime_ok": elapsed < 5.0})


# ------------------------------------------------------------------ AC02

def ac02_oracle(cfg, instances=100):
    rng = np.random.default_rng(cfg.seed + 2)
    worst_ev = worst_det = worst_w = 0.0
    for _ in range(instances):
        n = int(rng.integers(3, 65))
        sp = cfg.operator(lam=float(rng.uniform(0, 10)), x=float(rng.random()))
        for bc in (BC.DIRICHLET, BC.PERIODIC):
            H = build(sp, n, bc)
            ref = np.linalg.eigvalsh(H.to_dense())
            worst_ev = max(worst_ev, float(np.max(np.abs(S.spectrum(H).eigenvalues - ref))))
        E = float(rng.uniform(-2, 2 + sp.lam))
        Hd = build(sp, n, BC.DIRICHLET).to_dense()
        ref = np.linalg.det(Hd - E * np.eye(n))
        got = float(C.det_sequence(sp, n, E)[n])
        worst_det = max(worst_det, float(abs(got - ref) / abs(ref)))
        Hp = build(sp, n, BC.PERIODIC).to_dense()
        ref = np.linalg.det(Hp - E * np.eye(n))
        got = float(C.periodic_det(sp, n, E))
        worst_w = max(worst_w, float(abs(got - ref) / abs(ref)))
    ok = max(worst_ev, worst_det, worst_w) <= 1e-9
    return CriterionResult("AC02-oracle", ok, {"instances": instances, "eigenvalues": worst_ev,
                                                "det_rel": worst_det, "periodic_det_rel": worst_w})


# ------------------------------------------------------------------ AC03

def ac03_transfer_identity(cfg):
    """Literal entry pattern for steps ``[[lam v - E, -1], [1, 0]]``; signed pattern for the
    Schrodinger steps ``[[E - lam v, -1], [1, 0]]``."""
    rng = np.random.default_rng(cfg.seed + 3)
    worst = {"determinant": 0.0, "schrodinger": 0.0}
    worst_d = 0.0
    cases = 0
    for lam in (2.0, cfg.lam):
        for n in (1, 2, 3, 8, 50, 200, 500, 1000):
            for _ in range(3):
                sp = cfg.operator(lam=lam, x=float(rng.random()))
                E = float(rng.uniform(-2, 2 + lam))
                for conv in ("determinant", "schrodinger"):
                    r = C.entry_identity(sp, n, E, conv)
                    worst[conv] = max(worst[conv], r.max_rel)
                    worst_d = max(worst_d, r.det_rel)
                cases += 1
    ok = max(worst.values()) <= 1e-8 and worst_d <= 1e-8
    return CriterionResult("AC03-transfer-identity", ok,
                           {"cases": cases, "entry_rel_literal": worst["determinant"],
                            "entry_rel_signed": worst["schrodinger"], "det_minus_one": worst_d})


# ------------------------------------------------------------------ AC04

def ac04_rank_one_jumps(cfg):
    lam = 2.0
    sp = cfg.operator(lam=lam, x=0.0)
    worst_tr = 0.0
    bad = 0
    checked = 0
    for n in (13, 34):
        for k in range(n):
            checked += 1
            try:
                r = jump_perturbation(sp, n, k, tol=1e-12)
            except (AssertionError, ValueError):
                bad += 1
                continue
            worst_tr = max(worst_tr, abs(r.trace + lam))
            bad += r.rank != 1
    return CriterionResult("AC04-rank-one-jumps", bad == 0 and worst_tr <= 1e-12,
                           {"breakpoints": checked, "rank_violations": bad, "trace_error": worst_tr})


# ------------------------------------------------------------------ AC05

def ac05_almost_invariance(cfg, candidates=512, per_shift=100):
    sp = cfg.operator(x=0.0)
    cf = sp.alpha.cf(cfg.depth)
    xs = (np.arange(candidates) + 0.5) / candidates
    out, viol, short = {}, 0, 0
    for q in cfg.scales:
        rep = S.almost_invariance_sweep(sp, cf, q, xs, range(1, q), tol=cfg.eig_tol,
                                        max_points=per_shift)
        worst = max(r.deficit / r.bound for r in rep.values())
        v = sum(r.deficit > r.bound + 1e-9 for r in rep.values())
        s = sum(r.used < 100 for r in rep.values())
        viol += v
        short += s
        out[str(q)] = {"worst_ratio": worst, "violations": v, "min_phases": min(r.used for r in rep.values())}
    return CriterionResult("AC05-almost-invariance", viol == 0 and short == 0, out)


# ------------------------------------------------------------------ AC06

def ac06_repulsion(cfg, er=0.4):
    sp = cfg.operator(x=0.0)
    cf = sp.alpha.cf(cfg.depth)
    out, viol = {}, 0
    for q in cfg.scales:
        for K in (4, 8):
            r = S.eigenvalue_repulsion(sp, cf, q, K, er, tol=cfg.eig_tol)
            viol += not r.holds
            out[f"{q}_K{K}"] = {"bound": r.bound, "min_gap": r.min_gap, "skipped": r.skipped,
                                "left_limit": r.left_limit}
    return CriterionResult("AC06-repulsion", viol == 0, out)


# ------------------------------------------------------------------ AC07

def ac07_ids_lipschitz(cfg, n=233, samples=50, dE=0.005):
    t0 = time.perf_counter()
    out, ok = {}, True
    for lam in (2.0, 10.0):
        sp = cfg.operator(lam=lam)
        tab = I.ids_estimate(sp, n, I.default_grid(sp, dE), samples, cfg.ids_bc)
        r = I.lipschitz_modulus(tab)
        entry = {"max_slope": r.max_slope, "bound": r.bound, "slack": r.slack, "rho": r.rho,
                 "pass": r.passed}
        ok &= r.passed
        if sp.potential.name == "sawtooth":
            r0 = I.lipschitz_modulus(tab, rho=0.0)
            entry.update(bound_rho0=r0.bound, pass_rho0=r0.passed)
            ok &= r0.passed
        out[f"lambda_{lam:g}"] = entry
    fast = time.perf_counter() - t0 < 120
    out["runtime_ok"] = fast
    return CriterionResult("AC07-ids-lipschitz", ok and fast, out)


# ------------------------------------------------------------------ AC08 / AC09

def mid_grid(lam, points=50):
    lo, hi = -2.0, 2.0 + lam
    w = hi - lo
    return np.linspace(lo + w / 4, hi - w / 4, points)


def lyapunov_bound(spec, rho=None):
    """``max{0, ln(lam) - ln(2e / ((1 - rho) gamma_minus))}``; rho = 0 for the sawtooth."""
    v = spec.potential
    if rho is None:
        rho = 0.0 if v.name == "sawtooth" else er_tail(spec.alpha.cf(40))
    if spec.lam <= 0:
        return 0.0
    return max(0.0, math.log(spec.lam) - math.log(2 * math.e / ((1 - rho) * v.gamma_minus)))


def _gamma_curve(cfg, sp, Es):
    return C.lyapunov_finite(sp, cfg.lyap_n, Es, C.Sampling(cfg.sampling, cfg.windows))


def ac08_lyapunov_bound(cfg):
    sp = cfg.operator()
    Es = mid_grid(sp.lam)
    g = _gamma_curve(cfg, sp, Es).gamma
    bound = lyapunov_bound(sp) - 0.05
    return CriterionResult("AC08-lyapunov-lower-bound", bool(np.all(g >= bound)),
                           {"bound": bound, "min_gamma": float(g.min()),
                            "argmin_E": float(Es[int(np.argmin(g))]), "n": cfg.lyap_n})


def ac09_thouless(cfg):
    sp = cfg.operator()
    Es = mid_grid(sp.lam)
    g = _gamma_curve(cfg, sp, Es).gamma
    tab = I.ids_estimate(sp, cfg.ids_n, I.default_grid(sp, cfg.dE), cfg.phases, cfg.ids_bc)
    th = C.thouless(tab, Es)
    diff = float(np.max(np.abs(th - g)))
    free = cfg.operator(lam=0.0)
    ftab = I.ids_estimate(free, cfg.ids_n, I.default_grid(free, cfg.dE), cfg.phases, cfg.ids_bc)
    f3 = C.thouless(ftab, 3.0)
    f0 = C.thouless(ftab, 0.0)
    g3 = C.gamma_n(free, cfg.lyap_n, 3.0)
    free_err = max(abs(f3 - math.acosh(1.5)), abs(f0), abs(g3 - math.acosh(1.5)))
    return CriterionResult("AC09-thouless", diff <= 0.05 and free_err <= 0.01,
                           {"max_diff": diff, "free_E3": f3, "free_E0": f0, "free_error": free_err})


# ------------------------------------------------------------------ AC10

def ac10_ldt(cfg):
    sp = cfg.operator(x=0.0)
    E = sp.lam / 2 if sp.lam > 0 else cfg.E
    g = C.gamma_n(sp, cfg.lyap_n, E, C.Sampling(cfg.sampling, cfg.windows))
    reps = [L.deviation_set(sp, q, E, cfg.ldt_delta * g, grid=max(cfg.ldt_grid, 100 * q), gamma=g)
            for q in cfg.scales]
    meas = [r.measure for r in reps]
    decreasing = all(a > b for a, b in zip(meas, meas[1:]))
    covering = all(r.covering_ok for r in reps)
    return CriterionResult("AC10-ldt-decay", decreasing and covering,
                           {"gamma": g, "E": E, "measures": meas,
                            "intervals": [r.intervals for r in reps],
                            "log_slope": L.log_measure_slope(reps)})


# ------------------------------------------------------------------ AC11

def localization_suite(cfg, sp=None, n=None):
    sp = sp or cfg.operator(x=cfg.x)
    n = n or cfg.loc_n
    batch = Lo.box_eigenpairs(sp, n, seed=cfg.seed)
    ev = np.array([p.E for p in batch.pairs])
    lo, hi = ev.min(), ev.max()
    w = hi - lo
    mid = [p for p in batch.pairs if lo + w / 4 <= p.E <= hi - w / 4]
    gam = C.lyapunov_finite(sp, cfg.lyap_n, np.array([p.E for p in mid]),
                            C.Sampling("birkhoff", 16)).gamma
    fits = [Lo.decay_fit(p, ge, cfg.loc_delta * ge) for p, ge in zip(mid, gam)]
    rows = [{"E": p.E, "n0": p.n0, "rate": f.rate, "R2": f.r2, "verdict": f.verdict, "gammaE": ge}
            for p, f, ge in zip(mid, fits, gam)]
    return batch, mid, fits, gam, rows


def ac11_localization(cfg):
    t0 = time.perf_counter()
    sp = cfg.operator(x=cfg.x)
    batch, mid, fits, gam, _ = localization_suite(cfg, sp)
    eligible = [f for f in fits if f.points > 0]
    loc = [f for f, ge in zip(fits, gam) if f.points > 0 and f.verdict == "localized"
           and f.rate >= (1 - cfg.loc_delta) * ge]
    frac = len(loc) / len(eligible) if eligible else 0.0
    rng = np.random.default_rng(cfg.seed + 11)
    res, rejected = [], 0
    while len(res) < cfg.loc_windows:
        p = mid[int(rng.integers(len(mid)))]
        L_ = int(rng.integers(1, 100))
        n1 = int(rng.integers(1, p.n - L_))
        try:
            r = Lo.expansion_reconstruction(sp, p, n1, n1 + L_ - 1)
        except ConditioningError:
            rejected += 1
            continue
        res.append(r.residual)
    resid = max(res)
    fast = time.perf_counter() - t0 < 600
    max_res = max(p.residual for p in batch.pairs)
    return CriterionResult("AC11-localization", frac >= 0.9 and resid <= 1e-6 and fast and max_res <= 1e-8,
                           {"mid_pairs": len(mid), "eligible": len(eligible), "localized": len(loc),
                            "fraction": frac, "skipped": len(batch.skipped),
                            "max_pair_residual": max_res, "expansion_residual": resid,
                            "windows_rejected": rejected, "runtime_ok": fast})


# ------------------------------------------------------------------ AC12

def ac12_green_duality(cfg, queries=1000):
    rng = np.random.default_rng(cfg.seed + 12)
    worst, done, sym = 0.0, 0, 0.0
    while done < queries:
        lam = (2.0, cfg.lam)[done % 2]
        sp = cfg.operator(lam=lam, x=float(rng.random()))
        a = int(rng.integers(-100, 100))
        b = a + int(rng.integers(0, 60))
        m, k = (int(v) for v in rng.integers(a, b + 1, 2))
        E = float(rng.uniform(-2, 2 + lam))
        try:
            g = Lo.GreenBox(sp, a, b, E)
        except ConditioningError:
            continue
        x, y = g.direct(m, k), g.quotient(m, k)
        worst = max(worst, abs(x - y) / abs(x))
        sym = max(sym, abs(x - g.direct(k, m)) / abs(x))
        done += 1
    return CriterionResult("AC12-green-duality", worst <= 1e-8,
                           {"queries": queries, "max_rel": worst, "symmetry": sym})


# ------------------------------------------------------------------ AC13

def ac13_monotonicity_form(cfg, samples=1000):
    rng = np.random.default_rng(cfg.seed + 13)
    sp = cfg.operator(lam=1.0)
    worst, neg, done, skipped = 0.0, 0, 0, 0
    while done < samples:
        x = float(rng.random())
        E = float(rng.uniform(-3, 4))
        u = rng.standard_normal(2)
        r = C.monotonicity_form(sp, x, E, u, h=1e-6)
        if r.skipped:
            skipped += 1
            continue
        worst = max(worst, r.rel_err)
        neg += r.fd <= 0
        done += 1
    return CriterionResult("AC13-monotonicity-form", worst <= 1e-4 and neg == 0,
                           {"samples": samples, "max_rel": worst, "nonpositive": neg,
                            "skipped_near_breakpoints": skipped})


# ------------------------------------------------------------------ AC14

def fingerprint(cfg):
    """Hash of a representative workload (spectra, IDS, Lyapunov, LDT, eigenpairs)."""
    sp = cfg.operator()
    h = hashlib.sha256()
    xs = np.arange(40) / 40
    h.update(S.spectra(sp, 89, xs, BC.PERIODIC, tol=cfg.eig_tol).tobytes())
    tab = I.ids_estimate(sp, 89, I.default_grid(sp, 0.01), 24, "dirichlet")
    h.update(tab.N.tobytes())
    h.update(C.lyapunov_finite(sp, 500, np.linspace(0, sp.lam, 9)).gamma.tobytes())
    h.update(np.float64(L.deviation_set(sp, 13, sp.lam / 2 + 0.1, 0.1, gamma=0.7).measure).tobytes())
    for p in Lo.box_eigenpairs(sp, 120, seed=cfg.seed).pairs:
        h.update(p.psi.tobytes())
    return h.hexdigest()


def ac14_determinism(cfg, threads=(1, 3)):
    saved = get_threads()
    try:
        prints = []
        for t in threads:
            set_threads(t)
            prints.append(fingerprint(cfg))
            prints.append(fingerprint(cfg))
    finally:
        set_threads(saved)
    return CriterionResult("AC14-determinism", len(set(prints)) == 1,
                           {"threads": list(threads), "digest": prints[0]})


CRITERIA = [
    ac01_free_chain, ac02_oracle, ac03_transfer_identity, ac04_rank_one_jumps,
    ac05_almost_invariance, ac06_repulsion, ac07_ids_lipschitz, ac08_lyapunov_bound,
    ac09_thouless, ac10_ldt, ac11_localization, ac12_green_duality,
    ac13_monotonicity_form, ac14_determinism,
]


def run_all(cfg, only=None, log=None):
    results = []
    for fn in CRITERIA:
        if only and not any(fn.__name__.startswith(o.lower()[:4]) or o in fn.__name__ for o in only):
            continue
        t0 = time.perf_counter()
        r = fn(cfg)
        r.seconds = time.perf_counter() - t0
        results.append(r)
        if log:
            log(r.line())
    return results
