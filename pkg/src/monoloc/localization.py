"""Green's functions on boxes, regularity scans and eigenfunction decay fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from . import _kernels as K
from .errors import ConditioningError
from .operator import potential_values
from .parallel import chunks, get_threads, pmap
from .spectral import DEFAULT_TOL, sturm_count

NEAR_EIG = 1e-12
FLOOR = 1e-14
R2_MIN = 0.9
EXTENDED_RATE = 0.01


def _solve(d, E, rhs):
    """``(tridiag(1, d - E, 1)) u = rhs`` by banded LU with partial pivoting."""
    n = len(d)
    ab = np.empty((3, n))
    ab[0, :] = 1.0
    ab[1, :] = d - E
    ab[2, :] = 1.0
    return solve_banded((1, 1), ab, rhs, check_finite=False)


# -------------------------------------------------------------- Green's functions

@dataclass(frozen=True)
class GreenBox:
    """``G_[a,b](x; m, n) = <e_m, (H_[a,b](x) - E)^{-1} e_n>`` with absolute site labels."""

    spec: object
    a: int
    b: int
    E: float
    diag: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.b < self.a:
            raise ValueError("need a <= b")
        d = potential_values(self.spec, self.a, self.b - self.a + 1)
        object.__setattr__(self, "diag", d)
        lo = sturm_count(d, self.E - NEAR_EIG)
        hi = sturm_count(d, self.E + NEAR_EIG)
        if lo != hi:
            raise ConditioningError(f"E within {NEAR_EIG:g} of a box eigenvalue", NEAR_EIG)

    def _idx(self, m):
        if not self.a <= m <= self.b:
            raise IndexError(f"site {m} outside [{self.a}, {self.b}]")
        return m - self.a

    def solve(self, n):
        rhs = np.zeros(len(self.diag))
        rhs[self._idx(n)] = 1.0
        return _solve(self.diag, self.E, rhs)

    def direct(self, m, n):
        return float(self.solve(n)[self._idx(m)])

    def log_quotient(self, m, n):
        """``ln|G(m, n)|`` and sign from ``(-1)^{m+n} P_[a,i-1] P_[j+1,b] / P_[a,b]``."""
        i, j = sorted((self._idx(m), self._idx(n)))
        d, E = self.diag, self.E
        lt, st = K.log_abs_det(d, E, 0, i)
        lp, sp = K.log_abs_det(d, E, j + 1, len(d))
        lw, sw = K.log_abs_det(d, E, 0, len(d))
        sign = (-1.0) ** (j - i) * st * sp * sw
        return lt + lp - lw, sign

    def quotient(self, m, n):
        la, s = self.log_quotient(m, n)
        return s * math.exp(la) if la < 700 else s * math.inf


def green_element(spec, a, b, m, n, E):
    """``G_[a,b](m, n)`` by direct solve and by determinant quotient; returns ``(direct, quotient)``."""
    g = GreenBox(spec, a, b, float(E))
    return g.direct(m, n), g.quotient(m, n)


def edge_quotients(spec, a, b, l, E):
    """``|G(a, l)| = |P_{b-l}(x+(l+1)a)| / |P_{b-a+1}(x+a a)|`` and ``|G(l, b)| = |P_{l-a}(x+a a)| / ...``."""
    d = potential_values(spec, a, b - a + 1)
    i = l - a
    lw, _ = K.log_abs_det(d, E, 0, len(d))
    la, _ = K.log_abs_det(d, E, i + 1, len(d))
    lb, _ = K.log_abs_det(d, E, 0, i)
    return math.exp(la - lw), math.exp(lb - lw)


# -------------------------------------------------------------- regularity

def _guard(q):
    return int(math.ceil(q / 5))


@dataclass(frozen=True)
class RegularityResult:
    m: int
    regular: bool
    witness: tuple | None


def regularity_test(spec, m, mu, q, E):
    """Is site m ``(mu, q)``-regular?  Witness windows ``[n1, n1+q-1]`` keep m at least q/5 from both ends."""
    if q < 5:
        raise ValueError("q >= 5 required")
    start = m - q + 1
    d = potential_values(spec, start, 2 * q - 1)
    w = K.regular_scan(d, float(E), q, float(mu), _guard(q), q - 1, q)[0]
    if w < 0:
        return RegularityResult(m, False, None)
    n1 = int(w) + start
    return RegularityResult(m, True, (n1, n1 + q - 1))


def regular_mask(spec, sites, mu, q, E):
    """Regularity of a contiguous run of sites, vectorised."""
    sites = np.asarray(sites)
    lo, hi = int(sites.min()), int(sites.max()) + 1
    start = lo - q + 1
    d = potential_values(spec, start, hi - lo + 2 * q - 2)
    parts = chunks(hi - lo, 4 * get_threads())
    res = pmap(lambda ab: K.regular_scan(d, float(E), q, float(mu), _guard(q),
                                         q - 1 + ab[0], q - 1 + ab[1]), parts)
    w = np.concatenate(res)
    return w[sites - lo] >= 0


@dataclass(frozen=True)
class SeparationReport:
    qk: int
    E: float
    mu: float
    singular: np.ndarray
    separation: float       # min distance among singular pairs farther apart than (qk+1)/2
    radius: float           # max distance of a singular point from the reference site


def singular_separation(spec, qk, E, delta, scan, gamma, ref=None):
    """Scan sites for ``(gamma - delta, qk)``-singular points."""
    if not 0 < delta < gamma:
        raise ValueError("need 0 < delta < gamma")
    scan = np.arange(int(scan[0]), int(scan[1]))
    mu = gamma - delta
    reg = regular_mask(spec, scan, mu, qk, E)
    sing = scan[~reg]
    far = math.inf
    if len(sing) > 1:
        diff = np.abs(sing[:, None] - sing[None, :])
        diff = diff[diff > (qk + 1) / 2]
        if diff.size:
            far = float(diff.min())
    ref = int(np.median(sing)) if ref is None and len(sing) else ref
    radius = float(np.max(np.abs(sing - ref))) if len(sing) else 0.0
    return SeparationReport(qk, float(E), mu, sing, far, radius)


# -------------------------------------------------------------- eigenpairs

@dataclass
class EigenPair:
    """Dirichlet box eigenpair with ``psi(n0) = 1`` at the leftmost maximum.

    ``log_abs`` holds ``ln|psi|`` with full relative accuracy in the tails
    (from shooting); it is ``None`` for plain vectors.
    """

    E: float
    psi: np.ndarray
    n0: int
    residual: float
    log_abs: np.ndarray | None = None
    index: int = -1

    @property
    def n(self):
        return len(self.psi)

    @classmethod
    def from_vector(cls, E, psi, residual=math.nan, index=-1):
        psi = np.asarray(psi, dtype=float)
        n0 = int(np.argmax(np.abs(psi)))
        return cls(float(E), psi / psi[n0], n0, residual, None, index)

    @classmethod
    def from_log_profile(cls, E, log_abs, index=-1):
        """Synthetic input: a profile given directly as ``ln|psi|``."""
        la = np.asarray(log_abs, dtype=float)
        n0 = int(np.argmax(la))
        la = la - la[n0]
        return cls(float(E), np.exp(la), n0, math.nan, la, index)

    def participation(self):
        """``||psi||_2^2 / ||psi||_inf^2``: the number of sites carrying the mass."""
        return float(np.sum(self.psi ** 2))


def _residual(d, E, v):
    r = (d - E) * v
    r[:-1] += v[1:]
    r[1:] += v[:-1]
    return float(np.max(np.abs(r)))


def _inverse_iteration(d, E, seed, others, max_iter=10, tol=1e-10):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(len(d))
    v /= np.linalg.norm(v)
    shift = E
    for it in range(max_iter):
        try:
            w = _solve(d, shift, v)
        except (LinAlgError, ValueError):
            shift = E + 1e-13 * max(1.0, abs(E))
            continue
        for o in others:
            w -= np.dot(o, w) * o
        nrm = np.linalg.norm(w)
        if not np.isfinite(nrm) or nrm == 0:
            return None, it + 1
        v = w / nrm
        if it >= 1 and _residual(d, E, v) <= tol:
            return v, it + 1
    return (v, max_iter) if _residual(d, E, v) <= 1e-8 else (None, max_iter)


@dataclass(frozen=True)
class PairBatch:
    pairs: list
    skipped: list          # (index, E) without convergence
    n: int


def box_eigenpairs(spec, n, window=None, tol=1e-12, seed=0, cluster_gap=1e-8):
    """Eigenpairs of the Dirichlet box ``[0, n-1]`` with eigenvalue in ``window``.

    Eigenvalues come from bisection, vectors from inverse iteration (seeded
    per index, re-orthogonalised inside clusters closer than
    ``cluster_gap``), tail magnitudes from two-sided shooting.
    """
    d = potential_values(spec, 0, n)
    lo = float(d.min()) - 2.0 - 1e-9
    hi = float(d.max()) + 2.0 + 1e-9
    if window is None:
        j0, j1 = 0, n
    else:
        j0 = sturm_count(d, max(window[0], lo))
        j1 = sturm_count(d, min(window[1], hi))
    if j1 <= j0:
        return PairBatch([], [], n)
    ev = K.bisect_eigs(d, False, j0, j1, lo, hi, tol)

    # clusters of near-degenerate eigenvalues are handled sequentially
    groups, cur = [], [0]
    for i in range(1, len(ev)):
        if ev[i] - ev[i - 1] < cluster_gap:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)

    def work(group):
        done, out, bad = [], [], []
        for i in group:
            E = float(ev[i])
            v, _ = _inverse_iteration(d, E, (seed, j0 + i), done)
            if v is None:
                bad.append((j0 + i, E))
                continue
            done.append(v)
            n0 = int(np.argmax(np.abs(v)))
            la, sg = K.shoot_log_profile(d, E, n0)
            psi = v / v[n0]
            n0 = int(np.argmax(np.abs(psi) >= np.max(np.abs(psi)) * (1 - 1e-12)))
            psi = psi / psi[n0]
            la = la - la[n0]
            out.append(EigenPair(E, psi, n0, _residual(d, E, psi), la, j0 + i))
        return out, bad

    res = pmap(work, groups)
    pairs = [p for r in res for p in r[0]]
    skipped = [b for r in res for b in r[1]]
    return PairBatch(pairs, skipped, n)


# -------------------------------------------------------------- decay fits

@dataclass(frozen=True)
class DecayFit:
    rate: float            # nan unless r2 >= R2_MIN
    intercept: float
    r2: float
    window: tuple
    verdict: str
    slope: float           # raw fitted rate
    points: int


def decay_fit(pair, gammaE, delta, window=None):
    """Fit ``ln|psi(k)| ~ c - rate |k - n0|`` over ``|k - n0|`` in ``[n/20, n/4]``.

    Uses the shooting profile when present; plain vectors are floored at
    ``FLOOR``.  Verdicts: ``localized`` (good fit, rate >= gammaE - delta,
    rate > 0), ``extended`` (no decay), else ``inconclusive``.
    """
    n, n0 = pair.n, pair.n0
    w_lo, w_hi = (n / 20, n / 4) if window is None else window
    if n0 < n / 4 or n - 1 - n0 < n / 4:
        return DecayFit(math.nan, math.nan, math.nan, (w_lo, w_hi), "inconclusive", math.nan, 0)
    k = np.arange(n)
    dist = np.abs(k - n0)
    if pair.log_abs is not None:
        y = pair.log_abs
        ok = np.isfinite(y)
    else:
        a = np.abs(pair.psi)
        ok = a >= FLOOR
        with np.errstate(divide="ignore"):
            y = np.log(a)
    sel = ok & (dist >= w_lo) & (dist <= w_hi)
    if sel.sum() < 3:
        return DecayFit(math.nan, math.nan, math.nan, (w_lo, w_hi), "inconclusive", math.nan,
                        int(sel.sum()))
    t = -dist[sel].astype(float)
    yy = y[sel]
    slope, icpt = np.polyfit(t, yy, 1)
    pred = slope * t + icpt
    ss_res = float(np.sum((yy - pred) ** 2))
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    good = r2 >= R2_MIN
    rate = float(slope) if good else math.nan
    if good and slope > 0 and slope >= gammaE - delta:
        verdict = "localized"
    elif slope <= EXTENDED_RATE:
        verdict = "extended"
    else:
        verdict = "inconclusive"
    return DecayFit(rate, float(icpt), float(r2), (w_lo, w_hi), verdict, float(slope), int(sel.sum()))


# -------------------------------------------------------------- expansion

@dataclass(frozen=True)
class ExpansionResult:
    window: tuple
    residual: float
    distance: float         # from E to the window's Dirichlet spectrum
    conditioning: float     # 1 / distance


def expansion_reconstruction(spec, pair, n1, n2, box_start=0):
    """Max deviation of ``psi(m) + G(m,n1) psi(n1-1) + G(m,n2) psi(n2+1)`` over the window."""
    if n1 < 1 or n2 > pair.n - 2 or n2 < n1:
        raise ValueError("window must lie strictly inside the box")
    d = potential_values(spec, box_start + n1, n2 - n1 + 1)
    E = pair.E
    L = n2 - n1 + 1
    lo, hi = float(d.min()) - 2.0 - 1e-9, float(d.max()) + 2.0 + 1e-9
    ev = K.bisect_eigs(d, False, 0, L, lo, hi, DEFAULT_TOL)
    dist = float(np.min(np.abs(ev - E)))
    if dist < 1e-10:
        raise ConditioningError("pair energy is an eigenvalue of the window", dist)
    rhs = np.zeros((L, 2))
    rhs[0, 0] = 1.0
    rhs[-1, 1] = 1.0
    G = _solve(d, E, rhs)
    psi = pair.psi
    rec = -G[:, 0] * psi[n1 - 1] - G[:, 1] * psi[n2 + 1]
    res = float(np.max(np.abs(rec - psi[n1:n2 + 1])))
    return ExpansionResult((n1, n2), res, dist, 1.0 / dist)
