"""Continued fractions, rotation orbits and Diophantine bookkeeping for the frequency.

Denominators are exact Python integers.  Orbit points ``{j*alpha}`` are
computed in 64-bit fixed point (``alpha`` scaled by ``2**64``), so the
error of ``{j*alpha}`` is ``j * 2**-64`` rather than ``j * 2**-53``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .errors import CapacityError, PhaseCollisionError, PrecisionError, RationalAlphaError

MP_DPS = 50
MAX_DENOMINATOR = 2**127
GAP_TOL = 1e-12
_TWO64 = 2**64


# ---------------------------------------------------------------- frequencies

@dataclass(frozen=True)
class Frequency:
    """An irrational rotation number in (0, 1).

    Either given by a coefficient rule ``a_1, a_2, ...`` (``preperiod``
    followed by ``period`` repeated forever) or numerically (``period``
    empty).  Rule-based frequencies carry a 50-digit value ``alpha_mp``.
    """

    name: str
    alpha: float
    alpha_mp: object = field(compare=False, repr=False, default=None)
    preperiod: tuple = ()
    period: tuple = ()

    def __float__(self):
        return self.alpha

    @property
    def has_rule(self):
        return bool(self.period)

    def coefficient(self, k):
        """a_k for k >= 1 (rule-based frequencies only)."""
        if not self.period:
            raise ValueError(f"{self.name}: numeric frequency has no coefficient rule")
        if k < 1:
            raise ValueError("coefficients are indexed from 1")
        if k <= len(self.preperiod):
            return self.preperiod[k - 1]
        return self.period[(k - 1 - len(self.preperiod)) % len(self.period)]

    def cf(self, depth):
        """Continued fraction to ``depth`` coefficients."""
        if not self.period:
            return cf_expand(self.alpha_mp if self.alpha_mp is not None else self.alpha, depth)
        coeffs = [self.coefficient(k) for k in range(1, depth + 1)]
        with mpmath.workdps(MP_DPS):
            tails = [float(_tail_mp(self, k)) for k in range(1, depth + 2)]
        return ContinuedFraction.from_coeffs(coeffs, tails=tails, source=self.name)


def _tail_mp(freq, k, terms=120):
    # t_k = [a_k; a_{k+1}, ...] by backward evaluation of a long truncation
    t = mpmath.mpf(freq.coefficient(k + terms))
    for j in range(k + terms - 1, k - 1, -1):
        t = freq.coefficient(j) + 1 / t
    return t


def _rule_frequency(name, preperiod, period):
    probe = Frequency(name, 0.0, None, tuple(preperiod), tuple(period))
    with mpmath.workdps(MP_DPS):
        alpha = 1 / _tail_mp(probe, 1, terms=200)
        return Frequency(name, float(alpha), +alpha, tuple(preperiod), tuple(period))


GOLDEN = _rule_frequency("golden", (), (1,))
SILVER = _rule_frequency("silver", (), (2,))

_CF_RE = re.compile(r"^cf:\[([0-9,;\s]+)\]$")


def parse_frequency(text):
    """Parse ``golden``, ``silver``, ``cf:[a1,a2,...]``, ``cf:[pre;period]`` or ``num:<decimal>``.

    Without a semicolon the whole list is the repeating block.
    """
    text = text.strip()
    if text == "golden":
        return GOLDEN
    if text == "silver":
        return SILVER
    m = _CF_RE.match(text)
    if m:
        body = m.group(1)
        if ";" in body:
            pre_s, per_s = body.split(";", 1)
        else:
            pre_s, per_s = "", body
        pre = tuple(int(s) for s in pre_s.split(",") if s.strip())
        per = tuple(int(s) for s in per_s.split(",") if s.strip())
        if not per or any(a < 1 for a in pre + per):
            raise ValueError(f"bad coefficient rule {text!r}")
        return _rule_frequency(text, pre, per)
    if text.startswith("num:"):
        with mpmath.workdps(MP_DPS):
            a = mpmath.mpf(text[4:])
            if not 0 < a < 1:
                raise ValueError("numeric frequency must lie in (0, 1)")
            return Frequency(text, float(a), +a)
    raise ValueError(f"unknown frequency {text!r}")


def as_float(alpha):
    return alpha.alpha if isinstance(alpha, Frequency) else float(alpha)


@lru_cache(maxsize=256)
def _fixed64_cached(key):
    kind, value = key
    if kind == "mp":
        with mpmath.workdps(MP_DPS):
            frac = mpmath.mpf(value) % 1
            return int(mpmath.floor(frac * _TWO64)) % _TWO64
    return int(Fraction(value) % 1 * _TWO64) % _TWO64


def fixed64(alpha):
    """``floor({alpha} * 2**64)`` as a Python int."""
    if isinstance(alpha, Frequency):
        if alpha.alpha_mp is not None:
            with mpmath.workdps(MP_DPS):
                return _fixed64_cached(("mp", mpmath.nstr(alpha.alpha_mp, MP_DPS)))
        alpha = alpha.alpha
    if isinstance(alpha, mpmath.mpf):
        with mpmath.workdps(MP_DPS):
            return _fixed64_cached(("mp", mpmath.nstr(alpha, MP_DPS)))
    return _fixed64_cached(("f", float(alpha)))


def frac_multiples_u64(alpha, ms):
    """``{m*alpha}`` for integer array ``ms`` as uint64 fixed-point numerators."""
    a = np.uint64(fixed64(alpha))
    ms = np.asarray(ms, dtype=np.int64).astype(np.uint64)
    return ms * a  # wraps mod 2**64 by design


def frac_multiples(alpha, ms):
    """``{m*alpha}`` as floats in [0, 1); accurate to ``|m| * 2**-64 + 2**-53``."""
    u = frac_multiples_u64(alpha, ms)
    return (u >> np.uint64(11)).astype(np.float64) * 2.0**-53


def frac(x):
    y = np.mod(x, 1.0)
    return np.where(y >= 1.0, 0.0, y) if isinstance(y, np.ndarray) else (0.0 if y >= 1.0 else y)


# ---------------------------------------------------------- continued fractions

@dataclass(frozen=True)
class ContinuedFraction:
    """Coefficients ``a_1..a_K`` with convergents ``p_0..p_K``, ``q_0..q_K``.

    ``tails[i]`` holds ``t_{i+1} = [a_{i+1}; a_{i+2}, ...]`` for ``i = 0..K``.
    """

    coeffs: tuple
    p: tuple
    q: tuple
    tails: tuple = ()
    source: str = ""

    @classmethod
    def from_coeffs(cls, coeffs, tails=(), source=""):
        coeffs = tuple(int(a) for a in coeffs)
        if any(a < 1 for a in coeffs):
            raise ValueError("coefficients must be positive integers")
        p_prev, p = 1, 0
        q_prev, q = 0, 1
        ps, qs = [p], [q]
        for a in coeffs:
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
            if q > MAX_DENOMINATOR:
                raise CapacityError(f"q_{len(qs)} exceeds 2**127")
            ps.append(p)
            qs.append(q)
        return cls(coeffs, tuple(ps), tuple(qs), tuple(tails), source)

    @property
    def depth(self):
        return len(self.coeffs)

    def tail(self, k):
        """t_k for 1 <= k <= depth + 1."""
        return self.tails[k - 1]

    def index_of(self, qk):
        """Largest k with q_k == qk."""
        for k in range(len(self.q) - 1, -1, -1):
            if self.q[k] == qk:
                return k
        raise ValueError(f"{qk} is not a convergent denominator at depth {self.depth}")

    def convergent_error(self, k):
        """``q_k*alpha - p_k`` from the tail identity ``(-1)^k / (t_{k+1} q_k + q_{k-1})``."""
        q_km1 = self.q[k - 1] if k >= 1 else 0
        return (-1) ** k / (self.tail(k + 1) * self.q[k] + q_km1)


def cf_expand(alpha, depth):
    """Euclidean expansion of ``alpha`` in (0, 1) to ``depth`` coefficients.

    ``alpha`` may be a float or an mpmath number.  Raises
    :class:`RationalAlphaError` when a remainder drops below 1e-14, which
    means the input carries too little precision for the requested depth.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    hp = isinstance(alpha, mpmath.mpf)
    ctx = mpmath.workdps(MP_DPS) if hp else _nullctx()
    with ctx:
        r = alpha if hp else float(alpha)
        if not 0 < r < 1:
            raise ValueError("alpha must lie in (0, 1)")
        coeffs, tails = [], []
        for k in range(1, depth + 1):
            t = 1 / r
            a = int(mpmath.floor(t)) if hp else int(np.floor(t))
            r = t - a
            coeffs.append(a)
            tails.append(float(t))
            if r < 1e-14:
                raise RationalAlphaError(
                    f"alpha is rational to working precision at depth {k}; "
                    "supply a coefficient rule instead")
        tails.append(float(1 / r))
    return ContinuedFraction.from_coeffs(coeffs, tails=tails,
                                         source=f"num:{mpmath.nstr(alpha, 17) if hp else repr(alpha)}")


class _nullctx:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def torus_norm(n, alpha):
    """``||n*alpha|| = min({n*alpha}, 1 - {n*alpha})``."""
    if isinstance(alpha, Frequency) and alpha.alpha_mp is not None:
        alpha = alpha.alpha_mp
    if isinstance(alpha, mpmath.mpf):
        with mpmath.workdps(MP_DPS):
            y = (n * alpha) % 1
            return float(min(y, 1 - y))
    y = (n * float(alpha)) % 1.0
    return min(y, 1.0 - y)


# ------------------------------------------------------------------ three gaps

@dataclass(frozen=True)
class GapStructure:
    k: int
    gaps: np.ndarray
    large_count: int
    small_count: int
    large_len: float
    small_len: float | None


def gap_structure(cf, k, alpha):
    """Gaps of the orbit ``{j*alpha}``, ``j < q_k``, checked against the two-length law.

    Raises :class:`PrecisionError` if more than two distinct lengths appear,
    and ``AssertionError`` if the counts or length bounds fail.
    """
    if not 1 <= k < cf.depth:
        raise ValueError(f"need 1 <= k < depth={cf.depth}")
    qk, qkm1, qkp1 = cf.q[k], cf.q[k - 1], cf.q[k + 1]
    u = np.sort(frac_multiples_u64(alpha, np.arange(qk)))
    # circular differences in exact uint64 arithmetic
    d = np.diff(np.append(u, np.uint64(0)))  # last gap wraps through 2**64
    gaps = np.sort(d.astype(np.float64) * 2.0**-64)
    if qk == 1:
        gaps = np.array([1.0])

    levels = [gaps[0]]
    for g in gaps[1:]:
        if g - levels[-1] > GAP_TOL:
            levels.append(g)
    if len(levels) > 2:
        raise PrecisionError(f"{len(levels)} distinct gap lengths at k={k}")
    large = gaps[np.abs(gaps - levels[-1]) <= GAP_TOL]
    if len(levels) == 2:
        small = gaps[np.abs(gaps - levels[0]) <= GAP_TOL]
        small_len = float(small.mean())
    else:
        small, small_len = gaps[:0], None
    large_len = float(large.mean())

    gs = GapStructure(k, gaps, len(large), len(small), large_len, small_len)
    assert gs.large_count == qkm1, (gs.large_count, qkm1)
    assert gs.small_count == qk - qkm1, (gs.small_count, qk - qkm1)
    total = gs.large_count * large_len + gs.small_count * (small_len or 0.0)
    assert abs(total - 1.0) <= 1e-12 * max(1, qk), total
    eps = 1e-12
    if small_len is not None:
        assert 1 / qk - qkm1 / (qk * qkp1) - eps <= small_len <= 1 / qk + eps
    assert 1 / qk - eps <= large_len <= 1 / qk + 1 / qkp1 + eps
    return gs


# ------------------------------------------------------- good denominators etc.

def ratio_table(cf):
    """``[(k, q_k, q_{k-1}/q_{k+1})]`` for ``1 <= k < depth`` as exact fractions."""
    return [(k, cf.q[k], Fraction(cf.q[k - 1], cf.q[k + 1])) for k in range(1, cf.depth)]


def er_estimate(cf):
    """Minimum of ``q_{k-1}/q_{k+1}`` over the available k.

    Finite-depth proxy for the liminf; always <= 1/2.  See :func:`er_tail`
    for the tail value.
    """
    if cf.depth < 4:
        raise ValueError("need depth >= 4")
    return float(min(r for _, _, r in ratio_table(cf)))


def er_tail(cf):
    """Minimum ratio over the second half of the table (liminf proxy)."""
    if cf.depth < 4:
        raise ValueError("need depth >= 4")
    tab = ratio_table(cf)
    return float(min(r for _, _, r in tab[len(tab) // 2:]))


def _exact(er):
    return Fraction(repr(float(er))) if not isinstance(er, Fraction) else er


def good_denominators(cf, er):
    """All ``q_k`` (``1 <= k < depth``) with ``q_{k-1}/q_{k+1} <= er``, ascending."""
    if not 0 < er < 1:
        raise ValueError("need 0 < er < 1")
    bound = _exact(er)
    out = []
    for _, qk, r in ratio_table(cf):
        if r <= bound and (not out or out[-1] != qk):
            out.append(qk)
    return out


def good_denominator_ties(cf, er):
    """Denominators admitted only through the equality case ``ratio == er``."""
    bound = _exact(er)
    return [qk for _, qk, r in ratio_table(cf) if r == bound]


@dataclass(frozen=True)
class DiophantineParams:
    C: float
    tau: float
    N: int

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")


@dataclass(frozen=True)
class DiophantineReport:
    holds: bool
    worst_n: int
    worst_ratio: float


def diophantine_check(cf, params, alpha):
    """Check ``||n alpha|| >= C n^-tau`` for every ``1 <= n <= N``.

    ``worst_ratio`` is ``min_n n^tau ||n alpha||``, the best constant.
    """
    if params.N > 10**7:
        raise ValueError("horizon too large for a direct sweep")
    n = np.arange(1, params.N + 1)
    f = frac_multiples(alpha, n)
    dist = np.minimum(f, 1.0 - f)
    ratio = dist * n.astype(np.float64) ** params.tau
    i = int(np.argmin(ratio))
    worst = float(ratio[i])
    return DiophantineReport(worst >= params.C, int(n[i]), worst)


# ------------------------------------------------------------------ breakpoints

@dataclass(frozen=True)
class Breakpoints:
    """``beta_l`` in increasing order; ``sites[l]`` is the j with ``beta_l = {-j alpha}``."""

    values: np.ndarray
    sites: np.ndarray

    def __len__(self):
        return len(self.values)


def beta_points(n, alpha):
    if n < 1:
        raise ValueError("n >= 1 required")
    j = np.arange(n)
    u = frac_multiples_u64(alpha, -j)
    order = np.argsort(u, kind="stable")
    us = u[order]
    if n > 1:
        d = np.diff(us).astype(np.float64) * 2.0**-64
        if d.min() < 1e-13:
            raise PhaseCollisionError("duplicate orbit points (rational alpha?)")
    vals = (us >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return Breakpoints(vals, j[order])


# ------------------------------------------------------------------ indifference

def indifference_admissible(x, k, cf):
    """Phase restriction under which ``{x + q_k alpha}`` stays on the same side of 0.

    Vectorised over ``x``; returns a bool for scalar input.
    """
    fx = frac(np.asarray(x, dtype=float))
    w = 1.0 / cf.q[k + 1]
    if k % 2 == 0:
        ok = ~((1.0 - w < fx) & (fx < 1.0))
    else:
        ok = ~((0.0 <= fx) & (fx < w))
    return bool(ok) if np.ndim(ok) == 0 else ok


@dataclass(frozen=True)
class IndifferenceResult:
    skipped: bool
    difference: float | None
    bound: float

    @property
    def holds(self):
        return self.skipped or self.difference <= self.bound


def indifference_check(x, k, cf, alpha):
    bound = 1.0 / cf.q[k + 1]
    if not indifference_admissible(x, k, cf):
        return IndifferenceResult(True, None, bound)
    fx = frac(x)
    shifted = frac(fx + float(frac_multiples(alpha, [cf.q[k]])[0]))
    return IndifferenceResult(False, abs(shifted - fx), bound)
