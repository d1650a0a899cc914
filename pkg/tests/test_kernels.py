import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoloc import _kernels as K
from monoloc.parallel import chunks, get_threads, pmap, set_threads


def tri(d, periodic=False):
    n = len(d)
    H = np.diag(d) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    if periodic and n > 2:
        H[0, -1] = H[-1, 0] = 1.0
    return H


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=30), st.booleans())
def test_counts_multi_matches_dense(d, periodic):
    d = np.array(d)
    ev = np.linalg.eigvalsh(tri(d, periodic))
    Es = np.linspace(ev.min() - 1, ev.max() + 1, 17)
    Es = Es[np.min(np.abs(Es[:, None] - ev[None, :]), axis=1) > 1e-8]
    c = K.counts_multi(d, Es, periodic)
    assert list(c) == [int(np.sum(ev < E)) for E in Es]


def test_periodic_count_double_root():
    # free periodic chain of even length has double eigenvalues
    d = np.zeros(8)
    for E in (-1.9, 0.1, 1.5, 2.1):
        ev = np.linalg.eigvalsh(tri(d, True))
        assert K.periodic_count(d, E) == int(np.sum(ev < E))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 300), st.floats(-3, 13), st.integers(0, 2**31))
def test_product_log_det_is_zero(n, E, seed):
    V = np.random.default_rng(seed).uniform(0, 10, n)
    ld, sg = K.product_log_det(V, E, 0, n)
    assert abs(ld) < 1e-10 and sg == 1.0


def test_log_abs_det_matches_slogdet():
    rng = np.random.default_rng(3)
    d = rng.uniform(0, 10, 40)
    s, l = np.linalg.slogdet(tri(d) - 4.2 * np.eye(40))
    got, sign = K.log_abs_det(d, 4.2, 0, 40)
    assert got == pytest.approx(l, rel=1e-12) and sign == s


def test_shoot_profile_matches_eigenvector():
    rng = np.random.default_rng(5)
    d = rng.uniform(0, 10, 60)
    w, v = np.linalg.eigh(tri(d))
    i = 30
    psi = v[:, i]
    n0 = int(np.argmax(np.abs(psi)))
    la, sg = K.shoot_log_profile(d, w[i], n0)
    ref = np.log(np.abs(psi / psi[n0]))
    big = np.abs(psi) > 1e-8
    assert np.max(np.abs(la[big] - ref[big])) < 1e-6


def test_pmap_order_and_threads():
    saved = get_threads()
    try:
        set_threads(3)
        assert pmap(lambda v: v * v, range(20)) == [v * v for v in range(20)]
    finally:
        set_threads(saved)
    parts = chunks(10, 3)
    assert parts[0][0] == 0 and parts[-1][1] == 10
    assert all(a[1] == b[0] for a, b in zip(parts, parts[1:]))
