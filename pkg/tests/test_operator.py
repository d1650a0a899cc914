import numpy as np
import pytest
from conftest import make
from hypothesis import given, settings
from hypothesis import strategies as st

from monoloc.arithmetic import GOLDEN, beta_points
from monoloc.operator import BC, build, jump_perturbation, potential_rows, potential_values, shift_conjugation_defect


def test_dense_shapes():
    H = build(make(0.0), 3, "dirichlet").to_dense()
    assert np.array_equal(H, np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float))
    P = build(make(0.0), 3, "periodic").to_dense()
    assert P[0, 2] == P[2, 0] == 1.0


def test_left_limit_at_zero():
    H = build(make(1.0, 0.0), 1, BC.PERIODIC, left_limit=True)
    assert list(H.diag) == [1.0]
    assert list(build(make(1.0, 0.0), 1, BC.PERIODIC).diag) == [0.0]


def test_free_diag_zero():
    assert np.all(potential_values(make(0.0, 0.3), 0, 100) == 0)


@pytest.mark.parametrize("n", [13, 34])
def test_rank_one_jumps(n):
    sp = make(2.0)
    sites = []
    for k in range(n):
        r = jump_perturbation(sp, n, k)
        assert r.rank == 1 and r.trace == pytest.approx(-2.0, abs=1e-12)
        assert r.delta[r.site] == pytest.approx(-2.0, abs=1e-12)
        sites.append(r.site)
    assert sorted(sites) == list(range(n))


def test_single_site_jump():
    r = jump_perturbation(make(3.0), 1, 0)
    assert r.delta == pytest.approx([-3.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1, exclude_max=True), st.integers(1, 12))
def test_shift_conjugation_support(x, r):
    # the defect lives on r sites and is bounded by lam * gamma_plus whenever x is admissible
    d = shift_conjugation_defect(make(1.0, x), 13, r)
    assert np.count_nonzero(np.abs(d) > 1e-12) <= r


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=5), st.integers(1, 40))
def test_rows_match_single(xs, n):
    sp = make(1.7)
    R = potential_rows(sp, xs, n)
    for x, row in zip(xs, R):
        assert np.array_equal(row, potential_values(sp.at(x), 0, n))
