import math

import numpy as np
import pytest
from conftest import make

from monoloc import ldt as L
from monoloc.cocycle import gamma_n


@pytest.fixture(scope="module")
def gamma10():
    return gamma_n(make(10.0), 10_000, 5.0)


def test_deviation_decreases(gamma10):
    sp = make(10.0)
    reps = [L.deviation_set(sp, q, 5.0, 0.3 * gamma10, grid=100_000, gamma=gamma10) for q in (13, 34, 89)]
    m = [r.measure for r in reps]
    assert m[0] > m[1] > m[2]
    assert all(r.covering_ok for r in reps)
    assert L.log_measure_slope(reps) < 0


def test_delta_above_gamma_rejected():
    with pytest.raises(ValueError):
        L.deviation_set(make(10.0), 13, 5.0, 1.0, gamma=0.7)


def test_grid_floor():
    with pytest.raises(ValueError):
        L.deviation_set(make(10.0), 13, 5.0, 0.1, grid=100, gamma=0.7)


def test_free_hyperbolic_empty():
    g = math.acosh(1.5)
    r = L.deviation_set(make(0.0), 13, 3.0, 0.3 * g, gamma=g)
    assert r.measure == 0.0 and r.intervals == 0


def test_runs_circular():
    m = np.array([1, 1, 0, 0, 1, 0, 1, 1], dtype=bool)
    runs = L._runs(m)
    assert sorted(runs) == [(4, 1), (6, 4)]
    assert L._runs(np.zeros(5, bool)) == []
    assert L._runs(np.ones(5, bool)) == [(0, 5)]


def test_cluster_identity():
    s = L.cluster_split(make(10.0), 34, 0.3, 5.0)
    assert s.identity_error < 1e-9
    assert s.C1 > 0


def test_cluster_below_spectrum():
    s = L.cluster_split(make(10.0), 13, 0.3, -5.0)
    assert len(s.nu_minus) == 0 and s.log_minus == 0.0


def test_cluster_spacing_scale():
    sp = make(10.0)
    ref = L.reference_C1(sp)
    for q in (13, 34, 89):
        assert L.cluster_split(sp, q, 0.41, 5.0).C1 >= ref / 2


def test_stability_trivial():
    sp = make(10.0)
    assert L.log_stability(sp, 13, [(0.3, 0.3)], 5.0).max_dev == 0.0
    assert L.log_stability(make(0.0), 13, [(0.1, 0.7)], 0.5).max_dev < 1e-9


def test_stability_ratio():
    sp = make(10.0)
    r = L.log_stability(sp, 89, L.stability_pairs(sp, 89), 5.0)
    assert np.isfinite(r.ratio) and r.ratio < 3


def test_zero_count_example():
    z = L.zero_count(make(2.0), 13, 1.0)
    assert z.equal and z.resolved


def test_zero_count_below_spectrum():
    z = L.zero_count(make(2.0), 13, -5.0)
    assert z.poly_zeros == z.counting_jumps == 0
