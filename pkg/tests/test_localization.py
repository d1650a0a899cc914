import math

import numpy as np
import pytest
from conftest import make
from hypothesis import given, settings
from hypothesis import strategies as st

from monoloc import localization as Lo
from monoloc.cocycle import gamma_n
from monoloc.errors import ConditioningError


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1, exclude_max=True), st.integers(0, 12), st.integers(0, 12), st.floats(-2, 4))
def test_green_duality_box13(x, m, k, E):
    try:
        g = Lo.GreenBox(make(2.0, x), 0, 12, E)
    except ConditioningError:
        return
    a, b = g.direct(m, k), g.quotient(m, k)
    assert abs(a - b) <= 1e-8 * abs(a)


def test_green_near_eigenvalue():
    sp = make(2.0, 0.3)
    from monoloc.spectral import spectrum
    from monoloc.operator import build
    E = float(spectrum(build(sp, 13), 1e-13).eigenvalues[4])
    with pytest.raises(ConditioningError) as e:
        Lo.GreenBox(sp, 0, 12, E)
    assert e.value.distance > 0


def test_free_off_spectrum_regular():
    sp = make(0.0)
    mu = 0.9 * math.acosh(1.5)
    assert all(Lo.regularity_test(sp, m, mu, 50, 3.0).regular for m in range(0, 200, 17))


def test_eigenfunction_peak_singular():
    sp = make(10.0)
    batch = Lo.box_eigenpairs(sp, 400, window=(4.9, 5.1))
    p = batch.pairs[0]
    assert not Lo.regularity_test(sp, p.n0, 0.5 * gamma_n(sp, 10_000, p.E), 34, p.E).regular


def test_mu_zero_sanity():
    sp = make(10.0)
    r = Lo.regularity_test(sp, 100, 0.0, 13, 20.0)
    assert r.regular


def test_far_energy_no_singular():
    sp = make(10.0)
    g = gamma_n(sp, 5000, 40.0)
    r = Lo.singular_separation(sp, 34, 40.0, 0.3 * g, (0, 500), g)
    assert len(r.singular) == 0


def test_singular_points_separate():
    sp = make(10.0)
    g = gamma_n(sp, 10_000, 5.0)
    r = Lo.singular_separation(sp, 34, 5.0, 0.3 * g, (0, 2000), g)
    assert len(r.singular) > 0


def test_eigenpairs_residual():
    batch = Lo.box_eigenpairs(make(10.0), 500)
    assert len(batch.pairs) == 500 and not batch.skipped
    assert max(p.residual for p in batch.pairs) <= 1e-10


def test_free_extended():
    batch = Lo.box_eigenpairs(make(0.0), 400, window=(-0.05, 0.05))
    f = Lo.decay_fit(batch.pairs[0], 0.0, 0.1)
    assert f.verdict in ("extended", "inconclusive")
    p = Lo.EigenPair.from_vector(0.0, np.sin(np.pi * 200 * np.arange(1, 401) / 401))
    assert p.participation() > 50


def test_synthetic_profile_rate():
    k = np.arange(1000)
    p = Lo.EigenPair.from_log_profile(1.0, -0.7 * np.abs(k - 500))
    f = Lo.decay_fit(p, 0.7, 0.1)
    assert f.verdict == "localized" and f.rate == pytest.approx(0.7, rel=1e-9)


def test_edge_peak_inconclusive():
    k = np.arange(1000)
    p = Lo.EigenPair.from_log_profile(1.0, -0.7 * np.abs(k - 20))
    assert Lo.decay_fit(p, 0.7, 0.1).verdict == "inconclusive"


def test_localized_rate_tracks_gamma():
    sp = make(10.0)
    batch = Lo.box_eigenpairs(sp, 1000, window=(4.0, 6.0))
    ok = 0
    eligible = 0
    for p in batch.pairs:
        g = gamma_n(sp, 10_000, p.E)
        f = Lo.decay_fit(p, g, 0.15 * g)
        if f.points:
            eligible += 1
            ok += f.verdict == "localized" and f.rate >= 0.85 * g
    assert eligible > 0 and ok / eligible >= 0.9


@pytest.mark.parametrize("lam", [0.0, 10.0])
def test_expansion_identity(lam):
    sp = make(lam, 0.3)
    batch = Lo.box_eigenpairs(sp, 300, window=(lam / 2 - 0.5, lam / 2 + 0.5))
    p = batch.pairs[0]
    for n1, L in ((10, 30), (100, 80), (250, 40)):
        try:
            r = Lo.expansion_reconstruction(sp, p, n1, n1 + L - 1)
        except ConditioningError:
            continue
        assert r.residual <= 1e-6


def test_expansion_rejects_boundary():
    sp = make(10.0)
    p = Lo.box_eigenpairs(sp, 100).pairs[0]
    with pytest.raises(ValueError):
        Lo.expansion_reconstruction(sp, p, 0, 10)
    with pytest.raises(ValueError):
        Lo.expansion_reconstruction(sp, p, 50, 99)
