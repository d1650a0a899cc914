import numpy as np
import pytest
from conftest import make
from hypothesis import given, settings
from hypothesis import strategies as st

from monoloc import ids as I
from monoloc.arithmetic import SILVER
from monoloc.potential import blend


def test_free_ids_midpoint():
    sp = make(0.0)
    tab = I.ids_estimate(sp, 233, I.default_grid(sp), 20)
    i = int(np.argmin(np.abs(tab.E)))
    assert tab.N[i] == pytest.approx(0.5, abs=1 / 233)
    assert np.max(np.abs(tab.N - I.free_ids(tab.E))) <= 2 / 233


def test_ids_monotone_and_normalised(golden10):
    tab = I.ids_estimate(golden10, 89, I.default_grid(golden10, 0.01), 20)
    assert np.all(np.diff(tab.N) >= 0)
    assert tab.N[0] == 0.0 and tab.N[-1] == 1.0


def test_ids_preconditions(golden10):
    g = I.default_grid(golden10)
    with pytest.raises(ValueError):
        I.ids_estimate(golden10, 40, g, 50)
    with pytest.raises(ValueError):
        I.ids_estimate(golden10, 100, g, 10)
    with pytest.raises(ValueError):
        I.ids_estimate(golden10, 100, np.array([0.0, 0.1, 0.3]), 50)


def test_dirichlet_close_to_periodic(golden10):
    g = I.default_grid(golden10, 0.01)
    a = I.ids_estimate(golden10, 233, g, 20, "periodic")
    b = I.ids_estimate(golden10, 233, g, 20, "dirichlet")
    assert np.max(np.abs(a.N - b.N)) <= 2 / 233


@pytest.mark.parametrize("lam", [2.0, 10.0])
def test_lipschitz(lam):
    sp = make(lam)
    tab = I.ids_estimate(sp, 233, I.default_grid(sp), 50)
    r = I.lipschitz_modulus(tab)
    assert r.bound == pytest.approx(1 / (lam * (1 - 0.381966)), rel=1e-4)
    assert r.passed
    assert I.lipschitz_modulus(tab, rho=0.0).passed


def test_lipschitz_silver_blend(silver_blend):
    tab = I.ids_estimate(silver_blend, 169, I.default_grid(silver_blend), 30)
    assert I.lipschitz_modulus(tab).passed


def test_lipschitz_rejects_free():
    sp = make(0.0)
    tab = I.ids_estimate(sp, 60, I.default_grid(sp), 20)
    with pytest.raises(ValueError):
        I.lipschitz_modulus(tab)


def test_measure_free_chain():
    sp = make(0.0)
    tab = I.ids_estimate(sp, 2000, I.default_grid(sp), 20, "dirichlet")
    assert I.spectrum_measure(tab).measure == pytest.approx(4.0, abs=0.05)


def test_measure_lower_bound(golden10):
    tab = I.ids_estimate(golden10, 233, I.default_grid(golden10), 50)
    m = I.spectrum_measure(tab)
    assert m.lower == pytest.approx(10 * 0.618034, rel=1e-4)
    assert m.passed


def test_rows_schema(golden2):
    tab = I.ids_estimate(golden2, 55, I.default_grid(golden2, 0.01), 20)
    row = next(tab.rows())
    assert list(row) == ["E", "N", "n", "samples", "bc"]


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(0.001, 0.01))
def test_energy_grid_uniform(lo, dE):
    g = I.energy_grid(lo, lo + 1.0, dE)
    assert g[-1] >= lo + 1.0 - 1e-12 and np.ptp(np.diff(g)) < 1e-12
