"""Eigenvalues of finite restrictions by Sturm-count bisection, eigenvalue curves in the phase,
and the almost-invariance and repulsion checks at convergent scales."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .arithmetic import beta_points, frac, frac_multiples, good_denominators, indifference_admissible
from .errors import BracketError
from .operator import BC, build, potential_rows
from .parallel import chunks, get_threads, pmap

DEFAULT_TOL = 1e-10
MIN_TOL = 1e-13


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    tol: float
    bc: BC
    n: int
    provenance: tuple = ()

    def __len__(self):
        return self.n


def _check_tol(tol):
    if tol < MIN_TOL:
        raise ValueError(f"tol must be >= {MIN_TOL}")


def _gershgorin(diag, periodic):
    r = 2.0 + 1e-9
    return float(np.min(diag)) - r, float(np.max(diag)) + r


def _bisect_rows(D, periodic, tol):
    D = np.ascontiguousarray(D, dtype=np.float64)
    B = D.shape[0]
    lo = D.min(axis=1) - 2.0 - 1e-9
    hi = D.max(axis=1) + 2.0 + 1e-9
    parts = chunks(B, get_threads())
    res = pmap(lambda ab: K.bisect_batch(D[ab[0]:ab[1]], periodic, lo[ab[0]:ab[1]],
                                         hi[ab[0]:ab[1]], tol), parts)
    return np.concatenate(res, axis=0) if res else np.empty((0, D.shape[1]))


def sturm_count(diag, E, bc=BC.DIRICHLET):
    """Number of eigenvalues strictly below E (sign-agreement count of the minor recursion)."""
    d = np.ascontiguousarray(diag, dtype=np.float64)
    if BC(bc) is BC.PERIODIC:
        if len(d) < 3:
            return int(np.sum(_small_periodic(d) < E))
        return int(K.periodic_count(d, float(E)))
    return int(K.sturm_count(d, float(E), 0, len(d)))


def _small_periodic(d):
    if len(d) == 1:
        return np.array([d[0] + 2.0])
    m, h = 0.5 * (d[0] + d[1]), 0.5 * (d[0] - d[1])
    r = np.hypot(h, 2.0)
    return np.array([m - r, m + r])


def dirichlet_spectrum(H, tol=DEFAULT_TOL):
    """All eigenvalues of the Dirichlet restriction to absolute tolerance ``tol``."""
    _check_tol(tol)
    if H.bc is not BC.DIRICHLET:
        raise ValueError("dirichlet_spectrum needs a Dirichlet restriction")
    ev = _bisect_rows(H.diag[None, :], False, tol)[0]
    return Spectrum(ev, tol, BC.DIRICHLET, H.n, (H.spec, H.n))


def periodic_spectrum(H, tol=DEFAULT_TOL, method="bisect"):
    """Eigenvalues of the periodic restriction.

    ``method="bisect"`` bisects on the exact inertia count of the cyclic
    matrix, whose last pivot is ``W(E) / P_{n-1}(x, E)`` with
    ``W(E) = P_n(x,E) - P_{n-2}(x+alpha,E) - 2(-1)^n``; ``method="dense"``
    uses a dense symmetric solver (n <= 64).
    """
    _check_tol(tol)
    if H.bc is not BC.PERIODIC:
        raise ValueError("periodic_spectrum needs a periodic restriction")
    if H.n <= 2:
        ev = _small_periodic(H.diag)
    elif method == "dense":
        if H.n > 64:
            raise ValueError("dense fallback is limited to n <= 64")
        ev = np.linalg.eigvalsh(H.to_dense())
    else:
        ev = _bisect_rows(H.diag[None, :], True, tol)[0]
        lo, hi = _gershgorin(H.diag, True)
        if sturm_count(H.diag, lo, BC.PERIODIC) != 0 or sturm_count(H.diag, hi, BC.PERIODIC) != H.n:
            raise BracketError("periodic root count mismatch; tolerance too coarse")
    return Spectrum(np.asarray(ev), tol, BC.PERIODIC, H.n, (H.spec, H.n))


def spectrum(H, tol=DEFAULT_TOL):
    if H.bc is BC.PERIODIC:
        return periodic_spectrum(H, tol)
    return dirichlet_spectrum(H, tol)


def spectra(spec, n, xs, bc=BC.DIRICHLET, left_limit=False, tol=DEFAULT_TOL):
    """Sorted eigenvalues for each phase in ``xs``: array of shape (len(xs), n)."""
    _check_tol(tol)
    bc = BC(bc)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ll = np.broadcast_to(np.asarray(left_limit, dtype=bool), xs.shape)
    D = np.empty((len(xs), n))
    for flag in (False, True):
        sel = ll == flag
        if sel.any():
            D[sel] = potential_rows(spec, xs[sel], n, left_limit=flag)
    if bc is BC.PERIODIC and n <= 2:
        return np.array([_small_periodic(d) for d in D])
    return _bisect_rows(D, bc is BC.PERIODIC, tol)


def counting(s, E):
    """``#{mu <= E}`` (closed half-line); vectorised over E."""
    ev = s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s)
    r = np.searchsorted(ev, E, side="right")
    return int(r) if np.ndim(r) == 0 else r


def verify_roots(H, s):
    """Every eigenvalue brackets a root: the inertia count jumps across ``[mu - tol, mu + tol]``."""
    ev = s.eigenvalues
    for j, mu in enumerate(ev):
        lo = sturm_count(H.diag, mu - s.tol, H.bc)
        hi = sturm_count(H.diag, mu + s.tol, H.bc)
        if not lo <= j < hi:
            return False
    return True


# ---------------------------------------------------------------- eigencurves

@dataclass
class EigenCurve:
    level: int
    breakpoints: np.ndarray
    samples: list = field(default_factory=list)   # (x, mu, is_left_limit)
    jumps: dict = field(default_factory=dict)     # k -> (mu(beta_k - 0), mu(beta_k))


@dataclass
class CurveReport:
    slope_min: float
    slope_max: float
    slope_bounds: tuple
    slope_violations: int
    interlace_violations: int
    jump_sign_violations: int

    @property
    def ok(self):
        return not (self.slope_violations or self.interlace_violations or self.jump_sign_violations)


class InterlacingError(AssertionError):
    pass


def eigencurves(spec, n, levels=None, density=8, tol=DEFAULT_TOL, slack=1e-6, strict=True):
    """Sample the periodic eigenvalue curves over one period of the phase.

    Each breakpoint interval ``[beta_k, beta_{k+1})`` is sampled at
    ``beta_k``, interior points (``density`` per smallest gap) and the left
    limit at ``beta_{k+1}``.  Returns ``(curves, report)``.
    """
    bp = beta_points(n, spec.alpha)
    betas = np.append(bp.values, 1.0)
    gaps = np.diff(betas)
    step = gaps.min() / density
    levels = list(range(n)) if levels is None else list(levels)

    xs, ll, seg = [], [], []
    for k in range(n):
        a, b = betas[k], betas[k + 1]
        m = max(1, int(np.ceil((b - a) / step)))
        inner = a + (b - a) * np.arange(m) / m
        xs.extend(inner)
        ll.extend([False] * m)
        seg.extend([k] * m)
        xs.append(b % 1.0 if b < 1.0 else 0.0)
        ll.append(True)
        seg.append(k)
    xs = np.array(xs)
    ll = np.array(ll)
    seg = np.array(seg)
    mu = spectra(spec, n, xs, BC.PERIODIC, ll, tol)
    xplot = np.where(ll & (xs == 0.0), 1.0, xs)  # left limit at 1 plotted at x = 1

    lam = spec.lam
    lo_b, hi_b = lam * spec.potential.gamma_minus, lam * spec.potential.gamma_plus
    smin, smax, sv = np.inf, -np.inf, 0
    for k in range(n):
        idx = np.flatnonzero(seg == k)
        dx = np.diff(xplot[idx])
        dmu = np.diff(mu[idx], axis=0)
        slopes = dmu / dx[:, None]
        smin = min(smin, slopes.min())
        smax = max(smax, slopes.max())
        sv += int(np.sum((slopes < lo_b - slack) | (slopes > hi_b + slack)))

    # at beta_k: right value is the first sample of segment k, left limit the last of segment k-1
    right = np.array([mu[np.flatnonzero(seg == k)[0]] for k in range(n)])
    left = np.array([mu[np.flatnonzero(seg == (k - 1) % n)[-1]] for k in range(n)])
    eps = 10 * tol
    iv = int(np.sum(left[:, :-1] > right[:, 1:] + eps) + np.sum(right[:, 1:] > left[:, 1:] + eps))
    jv = int(np.sum(right > left + eps))
    report = CurveReport(float(smin), float(smax), (lo_b, hi_b), sv, iv, jv)

    curves = []
    for lvl in levels:
        c = EigenCurve(lvl, bp.values)
        c.samples = [(float(x), float(m), bool(f)) for x, m, f in zip(xplot, mu[:, lvl], ll)]
        c.jumps = {k: (float(left[k, lvl]), float(right[k, lvl])) for k in range(n)}
        curves.append(c)
    if strict and (iv or jv):
        raise InterlacingError(f"{iv} interlacing and {jv} jump-sign violations")
    return curves, report


# ------------------------------------------------------------ almost invariance

@dataclass(frozen=True)
class DeficitReport:
    qk: int
    r: int
    deficit: float
    bound: float
    used: int
    skipped: int
    slack: float

    @property
    def holds(self):
        return self.deficit <= self.bound + self.slack


def _admissible_prefix(spec, xs, rmax, k, cf):
    """``ok[i, r]``: ``x_i - j alpha`` admissible for every ``0 <= j <= r``."""
    shifts = frac_multiples(spec.alpha, np.arange(rmax + 1))
    adm = indifference_admissible(frac(xs[:, None] - shifts[None, :]), k, cf)
    return np.logical_and.accumulate(adm, axis=1)


def almost_invariance_sweep(spec, cf, qk, xs, rs, tol=DEFAULT_TOL, max_points=None):
    """Deficits ``max_m |mu~_m(x) - mu~_m(x - r alpha)|`` for several shifts r at once.

    Phases are admissible when ``x - j alpha`` satisfies the indifference
    restriction for every ``0 <= j <= r`` (this covers all sites whose
    potential changes under the cyclic shift).  ``max_points`` caps the
    number of admissible phases used per shift (the first ones in ``xs``).
    """
    k = cf.index_of(qk)
    xs = np.asarray(xs, dtype=float)
    rs = list(rs)
    bound = spec.lam * spec.potential.gamma_plus / cf.q[k + 1]
    ok = _admissible_prefix(spec, xs, max(rs + [0]), k, cf)
    base = spectra(spec, qk, xs, BC.PERIODIC, tol=tol)
    out = {}
    for r in rs:
        if r == 0:
            out[r] = DeficitReport(qk, 0, 0.0, bound, len(xs), 0, 10 * tol)
            continue
        idx = np.flatnonzero(ok[:, r])
        if max_points is not None:
            idx = idx[:max_points]
        back = frac(xs[idx] - float(frac_multiples(spec.alpha, [r])[0]))
        other = spectra(spec, qk, back, BC.PERIODIC, tol=tol)
        d = float(np.max(np.abs(base[idx] - other))) if len(idx) else 0.0
        out[r] = DeficitReport(qk, r, d, bound, len(idx), len(xs) - len(idx), 10 * tol)
    return out


def almost_invariance_deficit(spec, cf, qk, r, xs, tol=DEFAULT_TOL):
    return almost_invariance_sweep(spec, cf, qk, xs, [r], tol)[r]


# ------------------------------------------------------------------ repulsion

@dataclass(frozen=True)
class RepulsionReport:
    qk: int
    K: int
    er: float
    bound: float
    min_gap: float
    at: tuple          # (m, l) of the smallest gap
    left_limit: bool
    skipped: bool
    slack: float

    @property
    def holds(self):
        return self.skipped or self.min_gap >= self.bound - self.slack


def repulsion_bound(lam, K, er, gm, gp, qk, qkp1):
    return lam * (K * (1 - er) * gm / qk - 3 * gp / qkp1)


def eigenvalue_repulsion(spec, cf, qk, K, er, tol=DEFAULT_TOL):
    """Smallest ``mu~_{m+K} - mu~_m`` over all breakpoints against the linear repulsion bound.

    Evaluated at ``beta_l`` for odd k and at ``beta_l - 0`` for even k.
    """
    if qk not in good_denominators(cf, er):
        raise ValueError(f"q_k={qk} is not a good denominator for er={er}")
    if not 1 <= K <= qk - 1:
        raise ValueError("need 1 <= K <= q_k - 1")
    k = cf.index_of(qk)
    v = spec.potential
    bound = repulsion_bound(spec.lam, K, er, v.gamma_minus, v.gamma_plus, qk, cf.q[k + 1])
    left = k % 2 == 0
    if bound <= 0:
        return RepulsionReport(qk, K, er, bound, float("nan"), (-1, -1), left, True, 10 * tol)
    bp = beta_points(qk, spec.alpha)
    mu = spectra(spec, qk, bp.values, BC.PERIODIC, left, tol)
    gaps = mu[:, K:] - mu[:, :-K]          # gaps[l, m] for m <= qk-K-1
    l, m = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
    return RepulsionReport(qk, K, er, bound, float(gaps[l, m]), (int(m), int(l)), left, False, 10 * tol)
