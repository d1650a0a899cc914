import math

import numpy as np
import pytest
from conftest import make
from hypothesis import given, settings
from hypothesis import strategies as st

from monoloc import cocycle as C
from monoloc.ids import ids_estimate, default_grid
from monoloc.operator import build


def test_scaled_value_basics():
    a = C.ScaledValue.of(3.0)
    assert float(a) == 3.0 and a.sign == 1.0
    assert float(a * C.ScaledValue.of(-0.5)) == -1.5
    assert float(a - a) == 0.0
    big = C.ScaledValue(1.5, 5000)
    assert big.log_abs == pytest.approx(math.log(1.5) + 5000 * math.log(2))
    assert (big / big).rel_diff(C.ScaledValue.of(1.0)) == 0.0


@settings(max_examples=100)
@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_scaled_arithmetic_roundtrip(x, y):
    s = C.ScaledValue.of(x) + C.ScaledValue.of(y)
    assert float(s) == pytest.approx(x + y, rel=1e-15, abs=1e-300)


def test_det_one_by_one():
    assert float(C.det_sequence(make(3.0, 0.2), 1, 1.0)[1]) == pytest.approx(-0.4)


def test_det_oracle_n10():
    sp = make(2.0, 0.3)
    ref = np.linalg.det(build(sp, 10).to_dense() - 0.7 * np.eye(10))
    assert float(C.det_sequence(sp, 10, 0.7)[10]) == pytest.approx(ref, rel=1e-10)


def test_free_det_chebyshev():
    P = C.det_sequence(make(0.0), 12, 0.0)
    # U_n(0) pattern: 1, 0, -1, 0, 1, ...
    assert [float(p) for p in P[::2]] == [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0]


def test_transfer_n1():
    sp = make(2.0, 0.3)
    M = C.transfer_matrix(sp, 1, 0.5).to_array()
    assert M == pytest.approx(np.array([[0.5 - 0.6, -1], [1, 0]]))


@pytest.mark.parametrize("conv", ["schrodinger", "determinant"])
def test_entry_identity_example(conv):
    r = C.entry_identity(make(2.0, 0.15), 8, 0.4, conv)
    assert r.holds(1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 1000), st.floats(-2, 12), st.floats(0, 1, exclude_max=True))
def test_entry_identity_long(n, E, x):
    r = C.entry_identity(make(10.0, x), n, E)
    assert r.max_rel <= 1e-8 and r.det_rel <= 1e-8


def test_literal_pattern_fails_for_schrodinger_steps():
    # for odd n the Schrodinger product differs from the unsigned pattern by an overall sign
    sp = make(2.0, 0.15)
    M = C.transfer_matrix(sp, 3, 0.4)
    P = C.det_sequence(sp, 3, 0.4)
    assert float(M.entry(0, 0)) == pytest.approx(-float(P[3]))


def test_periodic_det_free_eigenvalue():
    assert abs(float(C.periodic_det(make(0.0), 3, 2.0))) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 12), st.floats(-2, 12), st.floats(0, 1, exclude_max=True))
def test_periodic_det_dense(n, E, x):
    sp = make(10.0, x)
    A = build(sp, n, "periodic").to_dense() - E * np.eye(n)
    ref = np.linalg.det(A)
    # absolute floor from Hadamard's bound on the dense roundoff
    floor = 1e-13 * np.prod(np.linalg.norm(A, axis=1))
    assert float(C.periodic_det(sp, n, E)) == pytest.approx(ref, rel=1e-8, abs=floor)


def test_lyapunov_free():
    assert C.gamma_n(make(0.0), 10_000, 3.0) == pytest.approx(math.acosh(1.5), abs=1e-3)
    assert C.gamma_n(make(0.0), 10_000, 0.0) == pytest.approx(0.0, abs=1e-3)


def test_lyapunov_lower_bound_mid():
    g = C.gamma_n(make(10.0), 10_000, 5.0)
    assert g >= math.log(10 / (2 * math.e)) - 0.05


def test_lyapunov_grid_sampling():
    c = C.lyapunov_finite(make(10.0), 2000, [4.0, 6.0], C.Sampling("grid", 32))
    assert c.gamma.shape == (2,) and np.all(c.gamma > 0.5)
    rows = list(c.rows())
    assert set(rows[0]) == {"E", "gamma_n", "n", "sampling", "stderr_estimate"}


def test_upper_bound_free():
    r = C.upper_bound_check(make(0.0), np.arange(1, 60), 0.0, 0.1, gamma=0.0)
    assert not r.violations


def test_upper_bound_large_coupling():
    r = C.upper_bound_check(make(10.0), np.arange(50, 2001, 50), 5.0, 0.1, x_samples=50)
    assert r.clean_tail


def test_thouless_free():
    tab = ids_estimate(make(0.0), 233, default_grid(make(0.0)), 20)
    assert C.thouless(tab, 3.0) == pytest.approx(math.acosh(1.5), abs=0.01)
    assert C.thouless(tab, 0.0) == pytest.approx(0.0, abs=0.01)


def test_thouless_warns_far_outside():
    tab = ids_estimate(make(0.0), 60, default_grid(make(0.0)), 20)
    with pytest.warns(RuntimeWarning):
        C.thouless(tab, 100.0)


def test_monotonicity_form_u0():
    sp = make(1.0)
    r = C.monotonicity_form(sp, 0.3, 0.7, (0.0, 1.0))
    assert r.closed == pytest.approx(1.0) and r.rel_err < 1e-6


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(-3, 4), st.floats(-5, 5), st.floats(-5, 5))
def test_monotonicity_form_positive(x, E, u1, u2):
    if abs(u1) + abs(u2) < 1e-3:
        return
    r = C.monotonicity_form(make(1.0), x, E, (u1, u2))
    assert r.skipped or (r.rel_err <= 1e-4 and r.positive)


def test_monotonicity_form_skips_breakpoint():
    assert C.monotonicity_form(make(1.0), 1e-8, 0.3, (1.0, 1.0)).skipped
