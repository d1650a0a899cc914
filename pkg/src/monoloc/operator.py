"""Dirichlet and periodic finite restrictions of H(x) as tridiagonal data."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .arithmetic import beta_points, frac, frac_multiples
from .errors import PhaseCollisionError

BREAK_TOL = 1e-13


class BC(str, Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"


def _bc(bc):
    return bc if isinstance(bc, BC) else BC(str(bc).lower())


@dataclass(frozen=True)
class FiniteRestriction:
    """``H`` restricted to sites ``start .. start+n-1``.

    Off-diagonal entries are all 1; the periodic version adds the two
    corner entries (n >= 3).  Only the diagonal is stored.
    """

    spec: object
    n: int
    bc: BC
    diag: np.ndarray
    left_limit: bool = False
    start: int = 0

    @property
    def corners(self):
        return self.bc is BC.PERIODIC and self.n >= 3

    def to_dense(self):
        n, d = self.n, self.diag
        if self.bc is BC.PERIODIC and n <= 2:
            # wrap-around hopping lands on the same pair of sites
            return np.array([[d[0] + 2.0]]) if n == 1 else np.array([[d[0], 2.0], [2.0, d[1]]])
        h = np.diag(d.astype(float))
        i = np.arange(n - 1)
        h[i, i + 1] = h[i + 1, i] = 1.0
        if self.corners:
            h[0, n - 1] = h[n - 1, 0] = 1.0
        return h

    def dirichlet(self):
        return FiniteRestriction(self.spec, self.n, BC.DIRICHLET, self.diag, self.left_limit, self.start)


def potential_values(spec, start, n, left_limit=False):
    """``lam * v({x + m alpha})`` for ``m = start..start+n-1`` with the breakpoint convention.

    Sites whose phase lies within ``BREAK_TOL`` of an integer take the left
    limit ``lam * 1`` when ``left_limit`` is set and ``lam * v(0) = 0``
    otherwise.
    """
    ph = spec.phases(start, n)
    vals = spec.lam * spec.potential.func(ph)
    at_break = (ph < BREAK_TOL) | (ph > 1.0 - BREAK_TOL)
    if np.any(at_break):
        vals = np.where(at_break, spec.lam * (1.0 if left_limit else 0.0), vals)
    return np.asarray(vals, dtype=np.float64)


def potential_rows(spec, xs, n, start=0, left_limit=False):
    """Diagonals for many phases at once: shape ``(len(xs), n)``.

    Row i equals ``potential_values(spec.at(xs[i]), start, n, left_limit)``.
    """
    xs = frac(np.atleast_1d(np.asarray(xs, dtype=float)))
    offs = frac_multiples(spec.alpha, np.arange(start, start + n))
    ph = frac(xs[:, None] + offs[None, :])
    vals = spec.lam * spec.potential.func(ph)
    at_break = (ph < BREAK_TOL) | (ph > 1.0 - BREAK_TOL)
    if np.any(at_break):
        vals = np.where(at_break, spec.lam * (1.0 if left_limit else 0.0), vals)
    return np.ascontiguousarray(vals, dtype=np.float64)


def build(spec, n, bc="dirichlet", left_limit=False, start=0):
    if n < 1:
        raise ValueError("n >= 1 required")
    return FiniteRestriction(spec, n, _bc(bc), potential_values(spec, start, n, left_limit),
                             bool(left_limit), int(start))


@dataclass(frozen=True)
class JumpReport:
    k: int
    beta: float
    site: int
    delta: np.ndarray
    trace: float
    rank: int


def jump_perturbation(spec, n, k, tol=1e-12):
    """``D = H~_n(beta_k) - H~_n(beta_k - 0)``; must be one diagonal entry equal to ``-lam``."""
    bp = beta_points(n, spec.alpha)
    beta = float(bp.values[k])
    s = spec.at(beta)
    right = build(s, n, BC.PERIODIC, left_limit=False)
    left = build(s, n, BC.PERIODIC, left_limit=True)
    delta = right.diag - left.diag
    nz = np.flatnonzero(np.abs(delta) > tol)
    rep = JumpReport(k, beta, int(bp.sites[k]), delta, float(delta.sum()), len(nz))
    if spec.lam > 0:
        if len(nz) > 1:
            raise PhaseCollisionError(f"{len(nz)} sites jump at beta_{k}")
        assert len(nz) == 1 and nz[0] == rep.site, (nz, rep.site)
        assert abs(rep.trace + spec.lam) <= tol, rep.trace
    return rep


def shift_conjugation_defect(spec, qk, r):
    """Diagonal of ``T^r H~(x) T^-r - H~(x - r alpha)`` (the off-diagonals agree exactly)."""
    d = build(spec, qk, BC.PERIODIC).diag
    shifted = np.roll(d, r)
    x_back = frac(spec.x - float(frac_multiples(spec.alpha, [r])[0]))
    other = build(spec.at(x_back), qk, BC.PERIODIC).diag
    return shifted - other
