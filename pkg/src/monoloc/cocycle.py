"""Transfer matrices, box determinants and Lyapunov exponents.

Large quantities are carried in scaled form ``mantissa * 2**exp2`` with an
integer exponent; ``log_scale`` exposes the same scale as a natural log.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .operator import BREAK_TOL, potential_rows, potential_values
from .parallel import pmap

LN2 = math.log(2.0)
CANCEL_FLAG = 1e6


# ------------------------------------------------------------------ scaled reals

@dataclass(frozen=True)
class ScaledValue:
    """``mantissa * 2**exp2`` with ``|mantissa|`` in [1, 2) or exactly 0."""

    mantissa: float
    exp2: int = 0

    def __post_init__(self):
        m, e = float(self.mantissa), int(self.exp2)
        if m == 0.0 or not math.isfinite(m):
            object.__setattr__(self, "mantissa", m)
            object.__setattr__(self, "exp2", 0 if m == 0.0 else e)
            return
        f, k = math.frexp(m)
        object.__setattr__(self, "mantissa", 2.0 * f)
        object.__setattr__(self, "exp2", e + k - 1)

    @classmethod
    def of(cls, x):
        return x if isinstance(x, ScaledValue) else cls(float(x), 0)

    @property
    def log_scale(self):
        return self.exp2 * LN2

    @property
    def sign(self):
        return (self.mantissa > 0) - (self.mantissa < 0)

    @property
    def log_abs(self):
        if self.mantissa == 0.0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.exp2 * LN2

    def __float__(self):
        try:
            return math.ldexp(self.mantissa, self.exp2)
        except OverflowError:
            return math.copysign(math.inf, self.mantissa)

    def __neg__(self):
        return ScaledValue(-self.mantissa, self.exp2)

    def __mul__(self, other):
        o = ScaledValue.of(other)
        return ScaledValue(self.mantissa * o.mantissa, self.exp2 + o.exp2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = ScaledValue.of(other)
        return ScaledValue(self.mantissa / o.mantissa, self.exp2 - o.exp2)

    def __add__(self, other):
        return scaled_sum([self, ScaledValue.of(other)])[0]

    __radd__ = __add__

    def __sub__(self, other):
        return scaled_sum([self, -ScaledValue.of(other)])[0]

    def __rsub__(self, other):
        return ScaledValue.of(other) - self

    def rel_diff(self, other):
        """``|a - b| / max(|a|, |b|)`` without leaving scaled form."""
        o = ScaledValue.of(other)
        d = abs(self - o)
        big = max(abs(self), abs(o))
        if big.mantissa == 0.0:
            return 0.0
        return float(d / big)

    def __abs__(self):
        return ScaledValue(abs(self.mantissa), self.exp2)

    def __lt__(self, other):
        return (self - ScaledValue.of(other)).mantissa < 0

    def __gt__(self, other):
        return (self - ScaledValue.of(other)).mantissa > 0

    def __le__(self, other):
        return not self > other

    def __ge__(self, other):
        return not self < other


def scaled_sum(terms):
    """Sum of scaled values with aligned exponents.

    Returns ``(total, loss)`` where ``loss = max|term| / |total|`` measures
    cancellation (``inf`` for an exact zero from nonzero terms).
    """
    terms = [ScaledValue.of(t) for t in terms]
    live = [t for t in terms if t.mantissa != 0.0]
    if not live:
        return ScaledValue(0.0), 1.0
    top = max(t.exp2 for t in live)
    acc = math.fsum(math.ldexp(t.mantissa, t.exp2 - top) for t in live if t.exp2 - top > -1100)
    big = max(abs(math.ldexp(t.mantissa, t.exp2 - top)) for t in live)
    total = ScaledValue(acc, top)
    loss = math.inf if acc == 0.0 else big / abs(acc)
    return total, loss


# ---------------------------------------------------------------- matrices

@dataclass(frozen=True)
class ScaledMatrix:
    """``2**exp2 * [[a, b], [c, d]]`` with the largest entry in [1, 2).

    ``log_det``/``det_sign`` come from a running QR factorisation of the
    same product (see :func:`transfer_matrix`), not from ``ad - bc``.
    """

    a: float
    b: float
    c: float
    d: float
    exp2: int
    log_det: float = 0.0
    det_sign: float = 1.0

    @property
    def log_scale(self):
        return self.exp2 * LN2

    def entry(self, i, j):
        return ScaledValue(((self.a, self.b), (self.c, self.d))[i][j], self.exp2)

    def entries(self):
        return [[self.entry(i, j) for j in range(2)] for i in range(2)]

    @property
    def det(self):
        return self.det_sign * math.exp(self.log_det)

    @property
    def log_norm(self):
        return float(K.log_spectral_norm(self.a, self.b, self.c, self.d, self.exp2))

    def to_array(self):
        """Plain floats; overflows for long hyperbolic products."""
        return np.ldexp(np.array([[self.a, self.b], [self.c, self.d]]), self.exp2)


# ------------------------------------------------------------- determinants

def _to_scaled(mant, expo):
    return [ScaledValue(float(m), int(e)) for m, e in zip(mant, expo)]


def det_sequence(spec, n, E, start=0):
    """``P_0 .. P_n`` with ``P_k = det(H_k(x) - E)`` as scaled values."""
    if n < 0:
        raise ValueError("n >= 0 required")
    d = potential_values(spec, start, n) if n else np.zeros(0)
    mant, expo = K.det_sequence(d, float(E))
    return _to_scaled(mant, expo)


def transfer_matrix(spec, n, E, start=0, convention="schrodinger"):
    """``M_n = A_{n-1} ... A_0`` with ``A_l = [[E - lam v(x + l alpha), -1], [1, 0]]``.

    ``convention="determinant"`` uses ``[[lam v - E, -1], [1, 0]]`` instead,
    which is ``-S A S`` with ``S = diag(1, -1)``: same norms, same determinant.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    V = potential_values(spec, start, n)
    if convention == "determinant":
        V, E = -V, -E
    elif convention != "schrodinger":
        raise ValueError(f"unknown convention {convention!r}")
    a, b, c, d, run = K.transfer_product(V, float(E), 0, n)
    ld, sg = K.product_log_det(V, float(E), 0, n)
    return ScaledMatrix(float(a), float(b), float(c), float(d), int(run), float(ld), float(sg))


@dataclass(frozen=True)
class IdentityReport:
    n: int
    max_rel: float       # worst entry mismatch
    det_rel: float       # |det M_n - 1|
    rel: tuple           # per entry, row-major

    def holds(self, tol=1e-8):
        return self.max_rel <= tol and self.det_rel <= tol


def entry_identity(spec, n, E, convention="schrodinger"):
    """Compare ``M_n`` with box determinants.

    With ``P_k = det(H_k - E)`` the Schrodinger product has entries
    ``(-1)^n P_n(x)``, ``(-1)^n P_{n-1}(x+alpha)``, ``(-1)^{n-1} P_{n-1}(x)``
    and ``(-1)^{n-1} P_{n-2}(x+alpha)``, i.e. the matrix
    ``[[Q_n(x), -Q_{n-1}(x+a)], [Q_{n-1}(x), -Q_{n-2}(x+a)]]`` with
    ``Q_k = (-1)^k P_k``.  The determinant convention gives the same
    pattern with ``Q_k = P_k``.
    """
    M = transfer_matrix(spec, n, E, convention=convention)
    P = det_sequence(spec, n, E)
    Ps = det_sequence(spec, n - 1, E, start=1) if n >= 1 else []
    flip = convention == "schrodinger"

    def Q(seq, k):
        if k < 0:
            return ScaledValue(0.0)
        return -seq[k] if flip and k % 2 else seq[k]

    ref = [Q(P, n), -Q(Ps, n - 1), Q(P, n - 1), -Q(Ps, n - 2)]
    got = [M.entry(0, 0), M.entry(0, 1), M.entry(1, 0), M.entry(1, 1)]
    rel = tuple(g.rel_diff(r) for g, r in zip(got, ref))
    return IdentityReport(n, max(rel), abs(M.det - 1.0), rel)


@dataclass(frozen=True)
class PeriodicDet:
    value: ScaledValue
    loss: float

    @property
    def cancelled(self):
        return self.loss > CANCEL_FLAG

    def __float__(self):
        return float(self.value)


def periodic_det(spec, n, E):
    """``det(H~_n - E) = P_n(x) - P_{n-2}(x+alpha) - 2(-1)^n`` in scaled arithmetic."""
    if n < 3:
        raise ValueError("n >= 3 required")
    d = potential_values(spec, 0, n)
    return _periodic_det_diag(d, float(E))


def _periodic_det_diag(d, E):
    n = len(d)
    m1, e1 = K.det_sequence(d, E)
    m2, e2 = K.det_sequence(d[1:n - 1], E)
    corr = -2.0 if n % 2 == 0 else 2.0
    total, loss = scaled_sum([ScaledValue(m1[-1], e1[-1]), -ScaledValue(m2[-1], e2[-1]), corr])
    return PeriodicDet(total, loss)


def periodic_det_grid(spec, n, Es):
    """``W(E)`` on an energy grid, as (sign, ln|W|, loss) arrays."""
    d = potential_values(spec, 0, n)
    out = [_periodic_det_diag(d, float(E)) for E in np.atleast_1d(Es)]
    sg = np.array([r.value.sign for r in out], dtype=float)
    la = np.array([r.value.log_abs for r in out])
    loss = np.array([r.loss for r in out])
    return sg, la, loss


# ---------------------------------------------------------------- Lyapunov

@dataclass(frozen=True)
class Sampling:
    """``birkhoff``: S consecutive windows of one orbit; ``grid``: S phases ``i/S``."""

    kind: str = "birkhoff"
    size: int = 64

    def __post_init__(self):
        if self.kind not in ("birkhoff", "grid"):
            raise ValueError(f"unknown sampling {self.kind!r}")
        if self.size < 1:
            raise ValueError("sampling size must be positive")

    def describe(self, n):
        if self.kind == "grid":
            return f"grid:{self.size}"
        return f"birkhoff:{self.size * n}"


@dataclass
class LyapCurve:
    E: np.ndarray
    gamma: np.ndarray
    n: int
    sampling: str
    stderr: np.ndarray

    def rows(self):
        for e, g, s in zip(self.E, self.gamma, self.stderr):
            yield {"E": float(e), "gamma_n": float(g), "n": self.n,
                   "sampling": self.sampling, "stderr_estimate": float(s)}


def lyapunov_finite(spec, n, E, sampling=None):
    """``gamma_n(E) = (1/n) * mean ln ||M_n(x, E)||`` (spectral norm).

    ``E`` may be a scalar or an array; always returns a :class:`LyapCurve`.
    Birkhoff sampling follows the orbit of ``spec.x``; grid sampling
    ignores it.
    """
    sampling = sampling or Sampling()
    Es = np.atleast_1d(np.asarray(E, dtype=float))
    S = sampling.size
    if sampling.kind == "birkhoff":
        V = potential_values(spec, 0, n * S)
        fn = lambda e: K.windowed_log_norms(V, e, n, S)
    else:
        D = potential_rows(spec, np.arange(S) / S, n)
        fn = lambda e: K.row_log_norms(D, e)
    logs = pmap(lambda e: fn(float(e)), Es)
    g = np.array([math.fsum(L) / (len(L) * n) for L in logs])
    se = np.array([np.std(L / n) / math.sqrt(len(L)) if len(L) > 1 else 0.0 for L in logs])
    return LyapCurve(Es, g, n, sampling.describe(n), se)


def gamma_n(spec, n, E, sampling=None):
    return float(lyapunov_finite(spec, n, E, sampling).gamma[0])


@dataclass(frozen=True)
class UpperBoundReport:
    E: float
    gamma: float
    kappa: float
    ns: np.ndarray
    max_rate: np.ndarray         # max_x ln|P_n(x, E)| / n
    violations: tuple            # the n with max_rate > gamma + kappa
    threshold: int               # empirical N: no violations for n > N in range

    @property
    def clean_tail(self):
        return self.threshold < int(self.ns[-1])


def upper_bound_check(spec, ns, E, kappa, x_samples=200, gamma=None, gamma_scale=10_000):
    """Check ``|P_n(x,E)| <= e^{n (gamma(E) + kappa)}`` on a uniform phase grid.

    ``gamma`` defaults to :func:`gamma_n` at ``gamma_scale`` with grid sampling.
    """
    ns = np.asarray(sorted(set(int(v) for v in ns)))
    if ns[0] < 1:
        raise ValueError("n >= 1 required")
    if gamma is None:
        gamma = gamma_n(spec, gamma_scale, E, Sampling("grid", 32))
    D = potential_rows(spec, np.arange(x_samples) / x_samples, int(ns[-1]))

    def row(d):
        m, e = K.det_sequence(d, float(E))
        with np.errstate(divide="ignore"):
            return np.log(np.abs(m[ns])) + e[ns] * LN2

    L = np.array(pmap(row, D))
    rate = L.max(axis=0) / ns
    bad = tuple(int(v) for v in ns[rate > gamma + kappa])
    return UpperBoundReport(float(E), float(gamma), float(kappa), ns, rate, bad,
                            max(bad) if bad else 0)


# ---------------------------------------------------------------- Thouless

def _G(u):
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(au > 0, u * np.log(np.where(au > 0, au, 1.0)) - u, 0.0)


SUPPORT_MASS = 1e-12


def thouless(ids, E):
    """``int ln|E - E'| dN(E')`` with dN uniform inside each table bin.

    Each bin is integrated in closed form, so the log singularity is exact
    when E falls inside a bin.  ``ids`` needs arrays ``E`` and ``N``.
    """
    grid = np.asarray(ids.E, dtype=float)
    dN = np.diff(np.asarray(ids.N, dtype=float))
    keep = dN > SUPPORT_MASS
    a, b, w = grid[:-1][keep], grid[1:][keep], dN[keep]
    Es = np.atleast_1d(np.asarray(E, dtype=float))
    if len(a):
        lo, hi = a.min() - 10.0, b.max() + 10.0
        if np.any((Es < lo) | (Es > hi)):
            warnings.warn("energy far outside the tabulated support; tail truncation bias", RuntimeWarning)
    dens = w / (b - a)
    out = np.array([math.fsum(dens * (_G(b - e) - _G(a - e))) for e in Es])
    return out if np.ndim(E) else float(out[0])


# ------------------------------------------------------ monotonicity form

@dataclass(frozen=True)
class FormResult:
    fd: float
    closed: float
    rel_err: float
    skipped: bool

    @property
    def positive(self):
        return self.skipped or self.fd > 0


def _near_break(y, h):
    f = y % 1.0
    return f <= h + BREAK_TOL or f >= 1.0 - h - BREAK_TOL


def monotonicity_form(spec, x, E, u, h=1e-6):
    """Central-difference ``<d/dx z, J z>`` for ``z = S(x+alpha) S(x) u`` against its closed form.

    ``S(y) = [[E - V(y), -1], [1, 0]]`` with ``V = lam v``, ``J = [[0, -1], [1, 0]]``;
    the closed form is ``V'(x) u1^2 + V'(x+alpha) ((V(x) - E) u1 + u2)^2``.
    """
    u1, u2 = float(u[0]), float(u[1])
    if u1 == 0.0 and u2 == 0.0:
        raise ValueError("u must be nonzero")
    a = spec.alpha_float
    if _near_break(x, h) or _near_break(x + a, h):
        return FormResult(math.nan, math.nan, math.nan, True)
    v, lam = spec.potential, spec.lam

    def V(y):
        return lam * float(v(y))

    def z(y):
        w1 = (E - V(y)) * u1 - u2
        w2 = u1
        return np.array([(E - V(y + a)) * w1 - w2, w1])

    dz = (z(x + h) - z(x - h)) / (2.0 * h)
    zz = z(x)
    fd = float(dz[0] * (-zz[1]) + dz[1] * zz[0])
    dv0 = lam * float(v.derivative(x))
    dv1 = lam * float(v.derivative(x + a))
    closed = dv0 * u1 ** 2 + dv1 * ((V(x) - E) * u1 + u2) ** 2
    rel = abs(fd - closed) / abs(closed) if closed else abs(fd)
    return FormResult(fd, closed, rel, False)
