"""Large-deviation diagnostics for ``P_q(x, E)`` at convergent scales."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .arithmetic import beta_points, er_tail
from .cocycle import Sampling, _periodic_det_diag, gamma_n
from .operator import BC, potential_rows
from .parallel import chunks, get_threads, pmap
from .spectral import spectra, sturm_count


def _log_abs_P(spec, q, xs, E, left_limit=False):
    """``ln|P_q(x, E)|`` and sign for every phase in ``xs``."""
    xs = np.asarray(xs, dtype=float)
    parts = chunks(len(xs), 4 * get_threads())

    def run(ab):
        D = potential_rows(spec, xs[ab[0]:ab[1]], q, left_limit=left_limit)
        return K.log_abs_det_rows(D, float(E))

    res = pmap(run, parts)
    return np.concatenate([r[0] for r in res]), np.concatenate([r[1] for r in res])


# ------------------------------------------------------------ deviation set

@dataclass(frozen=True)
class DeviationReport:
    qk: int
    E: float
    delta: float
    gamma: float
    measure: float
    intervals: int
    max_interval: float
    grid: int
    covering: tuple = ()

    @property
    def covering_ok(self):
        return self.intervals <= self.qk

    def summary(self):
        return {"qk": self.qk, "E": self.E, "delta": self.delta, "gamma": self.gamma,
                "measure": self.measure, "intervals": self.intervals,
                "maxIntervalLen": self.max_interval, "grid": self.grid}


def _runs(mask):
    """Maximal runs of True on a circular index set as ``(start, length)``."""
    G = len(mask)
    if not mask.any():
        return []
    if mask.all():
        return [(0, G)]
    # rotate so that index 0 is False; then runs never wrap
    shift = int(np.flatnonzero(~mask)[0])
    m = np.roll(mask, -shift).astype(np.int8)
    d = np.diff(np.concatenate([[0], m, [0]]))
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return [((int(s) + shift) % G, int(e - s)) for s, e in zip(starts, ends)]


def deviation_set(spec, qk, E, delta, grid=None, gamma=None, gamma_scale=10_000):
    """Grid measure and covering of ``{x : |P_qk(x, E)| < e^{qk (gamma - delta)}}``.

    ``gamma`` defaults to the finite-n Lyapunov exponent at ``gamma_scale``;
    ``grid`` defaults to ``100 * qk`` phases and may not be smaller.
    """
    if gamma is None:
        gamma = gamma_n(spec, gamma_scale, E)
    if not 0 < delta < gamma:
        raise ValueError(f"need 0 < delta < gamma (gamma = {gamma:.6g})")
    G = 100 * qk if grid is None else int(grid)
    if G < 100 * qk:
        raise ValueError("grid must have at least 100 * qk points")
    xs = np.arange(G) / G
    L, _ = _log_abs_P(spec, qk, xs, E)
    below = L < qk * (gamma - delta)
    runs = _runs(below)
    cover = tuple(((s / G - 0.5 / G) % 1.0, l / G) for s, l in runs)
    return DeviationReport(qk, float(E), float(delta), float(gamma), float(below.mean()),
                           len(runs), max((l for _, l in cover), default=0.0), G, cover)


def log_measure_slope(reports):
    """Least-squares slope of ``ln(measure)`` against ``qk`` (nonzero measures only)."""
    pts = [(r.qk, math.log(r.measure)) for r in reports if r.measure > 0]
    if len(pts) < 2:
        return math.nan
    q, y = np.array(pts).T
    return float(np.polyfit(q, y, 1)[0])


# ------------------------------------------------------------ clusters

@dataclass(frozen=True)
class ClusterSplit:
    qk: int
    x: float
    E: float
    nu_plus: np.ndarray     # above E, increasing
    nu_zero: np.ndarray     # around E
    nu_minus: np.ndarray    # below E, decreasing
    log_plus: float
    log_zero: float
    log_minus: float
    log_total: float
    C1: float

    @property
    def identity_error(self):
        return abs(self.log_plus + self.log_zero + self.log_minus - self.log_total)


def _logsum(v, E):
    return math.fsum(np.log(np.abs(v - E))) if len(v) else 0.0


def reference_C1(spec, er=None):
    """``lam (1 - er) gamma_minus``, the spacing constant implied by repulsion."""
    if er is None:
        er = er_tail(spec.alpha.cf(40))
    return spec.lam * (1 - er) * spec.potential.gamma_minus


def split_eigenvalues(mu, E, qk, zone=None, count=None):
    """Split sorted eigenvalues into (above, around, below) clusters.

    ``count`` takes that many eigenvalues nearest to E as the middle
    cluster; otherwise the middle cluster is everything within ``zone``.
    """
    mu = np.asarray(mu)
    if count is not None:
        mid = np.zeros(len(mu), dtype=bool)
        mid[np.argsort(np.abs(mu - E), kind="stable")[:count]] = True
    else:
        mid = np.abs(mu - E) < zone
    plus = np.sort(mu[~mid & (mu > E)])
    minus = np.sort(mu[~mid & (mu <= E)])[::-1]
    return plus, np.sort(mu[mid]), minus


def fit_C1(plus, minus, E, qk):
    """Largest C with ``|nu_j - E| >= j C / qk`` on both outer clusters."""
    c = math.inf
    for v in (plus, minus):
        if len(v):
            j = np.arange(1, len(v) + 1)
            c = min(c, float(np.min(qk * np.abs(v - E) / j)))
    return c


def cluster_split(spec, qk, x, E, count=None, zone=None, bc="dirichlet", tol=1e-12):
    """Factor ``P_qk(x, E)`` over eigenvalues above, around and below E.

    By default the middle cluster holds the eigenvalues within
    ``C_ref / (2 qk)`` of E, with ``C_ref`` from :func:`reference_C1`.
    """
    mu = spectra(spec.at(x), qk, [spec.at(x).x], bc, tol=tol)[0]
    if count is None and zone is None:
        ref = reference_C1(spec) if spec.lam > 0 else 1.0
        zone = ref / (2 * qk)
    plus, zero, minus = split_eigenvalues(mu, E, qk, zone, count)
    total = _logsum(mu, E)
    return ClusterSplit(qk, float(x), float(E), plus, zero, minus, _logsum(plus, E),
                        _logsum(zero, E), _logsum(minus, E), total, fit_C1(plus, minus, E, qk))


def stability_pairs(spec, qk, count=50, seed=0):
    """Phase pairs: half from breakpoints, half from interior points of the circle."""
    rng = np.random.default_rng(seed)
    b = beta_points(qk, spec.alpha).values
    nb = count // 2
    i, j = rng.integers(0, qk, nb), rng.integers(0, qk, nb)
    pairs = [(float(b[a]), float(b[c])) for a, c in zip(i, j)]
    pts = rng.random((count - nb, 2))
    pairs += [(float(u), float(v)) for u, v in pts]
    return pairs


@dataclass(frozen=True)
class StabilityReport:
    qk: int
    E: float
    max_dev: float
    ratio: float       # max_dev / ln(qk)
    pairs: int


def log_stability(spec, qk, pairs, E, bc="dirichlet", tol=1e-12):
    """``max |ln|P^pm(x)| - ln|P^pm(y)||`` over phase pairs."""
    xs = sorted({p for pr in pairs for p in pr})
    splits = {x: cluster_split(spec, qk, x, E, bc=bc, tol=tol) for x in xs}
    dev = 0.0
    for x, y in pairs:
        a, b = splits[x], splits[y]
        dev = max(dev, abs(a.log_plus - b.log_plus), abs(a.log_minus - b.log_minus))
    return StabilityReport(qk, float(E), dev, dev / math.log(qk), len(pairs))


# ------------------------------------------------------------ zero counting

@dataclass(frozen=True)
class ZeroCount:
    qk: int
    E: float
    poly_zeros: int        # sign changes inside breakpoint intervals
    counting_jumps: int    # breakpoints where the count below E jumps up
    exact_zeros: int       # count drops across intervals (with multiplicity)
    grid: int

    @property
    def equal(self):
        return self.poly_zeros == self.counting_jumps

    @property
    def resolved(self):
        return self.poly_zeros == self.exact_zeros


def _counts(spec, q, xs, E, bc, left_limit):
    D = potential_rows(spec, xs, q, left_limit=left_limit)
    return np.array([sturm_count(d, E, bc) for d in D])


def _signs(spec, q, xs, E, bc, left_limit=False):
    if bc is BC.DIRICHLET:
        return _log_abs_P(spec, q, xs, E, left_limit)[1]
    D = potential_rows(spec, xs, q, left_limit=left_limit)
    return np.array([float(_periodic_det_diag(d, float(E)).value.sign) for d in D])


def zero_count(spec, qk, E, grid=None, bc="dirichlet"):
    """Zeros of ``x -> P_qk(x, E)`` on [0, 1) against jumps of the eigenvalue count.

    Eigenvalues increase strictly in x between breakpoints, so the number
    of zeros in ``[beta_l, beta_{l+1})`` equals the drop of the count
    below E across it.  The grid sign changes give an independent count.
    """
    bc = BC(bc)
    G = 1000 * qk if grid is None else int(grid)
    b = beta_points(qk, spec.alpha).values
    b1 = np.append(b[1:], 1.0) % 1.0
    right = _counts(spec, qk, b, E, bc, False)        # N(beta_l)
    left = _counts(spec, qk, b1, E, bc, True)         # N(beta_{l+1} - 0)
    left_at = np.roll(left, 1)                        # N(beta_l - 0)
    jumps = int(np.sum(left_at < right))
    exact = int(np.sum(right - left))

    xs = np.arange(G) / G
    seg = np.searchsorted(b, xs, side="right") - 1
    s_grid = _signs(spec, qk, xs, E, bc)
    s_start = _signs(spec, qk, b, E, bc)
    s_end = _signs(spec, qk, b1, E, bc, left_limit=True)
    changes = 0
    for l in range(qk):
        seq = np.concatenate([[s_start[l]], s_grid[seg == l], [s_end[l]]])
        seq = seq[seq != 0]
        changes += int(np.sum(seq[1:] != seq[:-1]))
    if changes != exact:
        warnings.warn(f"grid of {G} points misses {exact - changes} zero(s); refine the grid",
                      RuntimeWarning)
    return ZeroCount(qk, float(E), changes, jumps, exact, G)
