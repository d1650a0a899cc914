"""Integrated density of states from finite-box eigenvalue counts."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arithmetic import er_tail
from .operator import BC
from .spectral import spectra

MIN_N = 50
MIN_SAMPLES = 20


@dataclass
class IdsTable:
    """``N(E)`` on a uniform energy grid.

    ``N[i] = (1 / (n S)) * sum_x #{mu <= E[i]}`` over S phases ``x = i/S``.
    """

    E: np.ndarray
    N: np.ndarray
    n: int
    samples: int
    bc: str
    spec: object = None

    @property
    def dE(self):
        return float(self.E[1] - self.E[0])

    def rows(self):
        for e, v in zip(self.E, self.N):
            yield {"E": float(e), "N": float(v), "n": self.n, "samples": self.samples, "bc": self.bc}


def energy_grid(lo, hi, dE):
    """Uniform grid from ``lo`` to (at least) ``hi`` with step ``dE``."""
    m = int(math.ceil((hi - lo) / dE - 1e-9))
    return lo + dE * np.arange(m + 1)


def default_grid(spec, dE=0.005):
    """Grid covering ``[-2, 2 + lam]`` with a little margin."""
    return energy_grid(-2.0 - 2 * dE, 2.0 + spec.lam + 2 * dE, dE)


def ids_estimate(spec, n, E_grid, x_samples, bc="periodic", tol=1e-10):
    """Tabulate ``N_n(E)`` over a uniform phase grid of size ``x_samples``."""
    if n < MIN_N:
        raise ValueError(f"n >= {MIN_N} required")
    if x_samples < MIN_SAMPLES:
        raise ValueError(f"at least {MIN_SAMPLES} phase samples required")
    E_grid = np.asarray(E_grid, dtype=float)
    steps = np.diff(E_grid)
    if len(E_grid) < 2 or np.any(steps <= 0) or np.ptp(steps) > 1e-9 * abs(steps[0]) + 1e-12:
        raise ValueError("energy grid must be uniform and increasing")
    bc = BC(bc)
    xs = np.arange(x_samples) / x_samples
    mu = spectra(spec, n, xs, bc, tol=tol)
    counts = np.zeros(len(E_grid), dtype=np.int64)
    for row in mu:
        counts += np.searchsorted(row, E_grid, side="right")
    return IdsTable(E_grid, counts / (n * x_samples), n, x_samples, bc.value, spec)


def free_ids(E):
    """``N(E) = arccos(-E/2) / pi`` of the free chain, clipped to [0, 1]."""
    E = np.asarray(E, dtype=float)
    return np.arccos(np.clip(-E / 2, -1, 1)) / np.pi


@dataclass(frozen=True)
class LipschitzResult:
    max_slope: float
    bound: float
    slack: float
    rho: float
    at: float

    @property
    def passed(self):
        return self.max_slope <= self.bound * 1.05 + self.slack


def lipschitz_modulus(ids, rho=None, lam=None, gamma_minus=None):
    """Largest ``dN/dE`` on the table against ``1 / (lam (1 - rho) gamma_minus)``.

    ``rho`` defaults to the tail ratio proxy of the frequency; pass
    ``rho=0`` for the sawtooth-specific bound.  The finite-size slack
    ``2 / (n dE)`` covers eigenvalue counting granularity.
    """
    spec = ids.spec
    lam = spec.lam if lam is None else lam
    gm = spec.potential.gamma_minus if gamma_minus is None else gamma_minus
    if lam <= 0:
        raise ValueError("Lipschitz bound undefined at lam = 0")
    dE = ids.dE
    if dE > 0.01 + 1e-12:
        raise ValueError("grid step must be <= 0.01")
    if rho is None:
        rho = er_tail(spec.alpha.cf(40))
    slopes = np.diff(ids.N) / dE
    i = int(np.argmax(slopes))
    return LipschitzResult(float(slopes[i]), 1.0 / (lam * (1 - rho) * gm), 2.0 / (ids.n * dE),
                           float(rho), float(ids.E[i]))


@dataclass(frozen=True)
class MeasureResult:
    measure: float
    lower: float
    upper: float

    @property
    def passed(self):
        return self.lower <= self.measure <= self.upper


def spectrum_measure(ids, threshold=1e-8, rho=None):
    """``dE * #{bins with mass > threshold}`` with its implied bounds.

    Lower bound ``lam (1 - rho) gamma_minus`` (inverse Lipschitz constant
    times total mass one); upper bound ``4 + lam``.
    """
    spec = ids.spec
    mass = np.diff(ids.N)
    meas = ids.dE * int(np.sum(mass > threshold))
    if spec.lam > 0:
        if rho is None:
            rho = er_tail(spec.alpha.cf(40))
        lower = spec.lam * (1 - rho) * spec.potential.gamma_minus
    else:
        lower = 0.0
    return MeasureResult(meas, lower, 4.0 + spec.lam)
