"""Lipschitz-monotone 1-periodic potentials and the operator parameters built on them."""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .arithmetic import Frequency, as_float, frac, frac_multiples, parse_frequency
from .errors import LipschitzViolation


@dataclass(frozen=True)
class MonotonePotential:
    """``v`` on [0, 1) with ``v(0) = 0``, ``v(1-0) = 1`` and slopes in ``[gamma_minus, gamma_plus]``.

    ``func`` and ``deriv`` act on arrays of points already reduced to [0, 1).
    The left limit at 1 is the declared value 1 and is never evaluated
    numerically.
    """

    name: str
    func: Callable = field(repr=False)
    gamma_minus: float
    gamma_plus: float
    deriv: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 < self.gamma_minus <= self.gamma_plus:
            raise ValueError("need 0 < gamma_minus <= gamma_plus")

    def __call__(self, x):
        return eval_periodic(self, x)

    def derivative(self, x):
        if self.deriv is None:
            raise NotImplementedError(f"{self.name}: no derivative supplied")
        return self.deriv(frac(np.asarray(x, dtype=float)))


def eval_periodic(v, x):
    """``v({x})``; at integers this is ``v(0) = 0``, never the left limit."""
    scalar = np.ndim(x) == 0
    y = v.func(frac(np.asarray(x, dtype=float)))
    return float(y) if scalar else y


def sawtooth():
    return MonotonePotential("sawtooth", lambda x: np.asarray(x, dtype=float) * 1.0, 1.0, 1.0,
                             deriv=lambda x: np.ones_like(np.asarray(x, dtype=float)))


def blend(c):
    """``(1-c) x + c x^2``, slopes in ``[1-c, 1+c]``."""
    c = float(c)
    if not 0 <= c < 1:
        raise ValueError("blend parameter must lie in [0, 1)")
    return MonotonePotential(
        f"blend:{c:g}",
        lambda x: (1 - c) * x + c * x * x,
        1 - c, 1 + c,
        deriv=lambda x: 1 - c + 2 * c * x,
    )


def pwl(points):
    """Piecewise-linear potential through ``(x_i, y_i)`` from (0, 0) to (1, 1)."""
    pts = [(float(a), float(b)) for a, b in points]
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if xs[0] != 0 or ys[0] != 0 or xs[-1] != 1 or ys[-1] != 1:
        raise ValueError("pwl nodes must start at (0,0) and end at (1,1)")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("pwl nodes must have increasing x")
    slopes = np.diff(ys) / np.diff(xs)
    if np.any(slopes <= 0):
        raise ValueError("pwl slopes must be positive")

    def deriv(x):
        i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(slopes) - 1)
        return slopes[i]

    name = "pwl:[" + ",".join(f"({a:g},{b:g})" for a, b in pts) + "]"
    return MonotonePotential(name, lambda x: np.interp(x, xs, ys), float(slopes.min()),
                             float(slopes.max()), deriv=deriv)


def parse_potential(text):
    """``sawtooth``, ``blend:<c>`` or ``pwl:[(x0,y0),...]``."""
    text = text.strip()
    if text == "sawtooth":
        return sawtooth()
    if text.startswith("blend:"):
        return blend(float(text[6:]))
    if text.startswith("pwl:"):
        return pwl(ast.literal_eval(text[4:]))
    raise ValueError(f"unknown potential {text!r}")


@dataclass(frozen=True)
class LipschitzReport:
    grid_size: int
    min_slope: float
    max_slope: float
    left_limit_error: float


def validate_lipschitz(v, grid_size=4096, declared=None):
    """Check the two-sided slope bounds on all grid pairs at most 10 steps apart.

    ``declared`` overrides ``(gamma_minus, gamma_plus)``.  Raises
    :class:`LipschitzViolation` carrying the offending ``(x, y)``.
    """
    if grid_size < 1000:
        raise ValueError("grid_size must be >= 1000")
    gm, gp = declared if declared is not None else (v.gamma_minus, v.gamma_plus)
    x = np.arange(grid_size) / grid_size
    fx = v.func(x)
    if abs(fx[0]) > 1e-15:
        raise LipschitzViolation(f"v(0) = {fx[0]} != 0", 0.0, 0.0)
    h = 1e-9
    left = float(v.func(np.array([1 - h]))[0])
    if abs(left - 1) > gp * h + 1e-12:
        raise LipschitzViolation(f"v(1-0) = {left} != 1", 1 - h, 1.0)
    lo, hi = math.inf, -math.inf
    tol = 1e-12
    for s in range(1, 11):
        dx = x[s:] - x[:-s]
        dv = fx[s:] - fx[:-s]
        slope = dv / dx
        i_lo, i_hi = int(np.argmin(slope)), int(np.argmax(slope))
        lo, hi = min(lo, slope[i_lo]), max(hi, slope[i_hi])
        if dv[i_lo] < gm * dx[i_lo] - tol:
            raise LipschitzViolation(f"slope {slope[i_lo]:.6g} below gamma_minus={gm}",
                                     float(x[i_lo]), float(x[i_lo + s]))
        if dv[i_hi] > gp * dx[i_hi] + tol:
            raise LipschitzViolation(f"slope {slope[i_hi]:.6g} above gamma_plus={gp}",
                                     float(x[i_hi]), float(x[i_hi + s]))
    return LipschitzReport(grid_size, float(lo), float(hi), abs(left - 1))


@dataclass(frozen=True)
class OperatorSpec:
    """Parameters of ``H(x)``: frequency, coupling, potential and phase."""

    alpha: Frequency | float
    lam: float
    potential: MonotonePotential
    x: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("coupling must be non-negative")
        object.__setattr__(self, "x", float(frac(float(self.x))))

    @property
    def alpha_float(self):
        return as_float(self.alpha)

    def at(self, x):
        return OperatorSpec(self.alpha, self.lam, self.potential, x)

    def with_lam(self, lam):
        return OperatorSpec(self.alpha, lam, self.potential, self.x)

    def phases(self, start, count):
        """``{x + m alpha}`` for ``m = start .. start+count-1``."""
        m = np.arange(start, start + count)
        return frac(self.x + frac_multiples(self.alpha, m))

    @classmethod
    def parse(cls, freq, lam, potential, x=0.0):
        f = parse_frequency(freq) if isinstance(freq, str) else freq
        v = parse_potential(potential) if isinstance(potential, str) else potential
        return cls(f, float(lam), v, x)


def sample_orbit(spec, m_start, m_stop):
    """``lam * v({x + m alpha})`` for ``m_start <= m < m_stop``."""
    return spec.lam * spec.potential.func(spec.phases(m_start, m_stop - m_start))
