import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoloc.arithmetic import (GOLDEN, SILVER, DiophantineParams, beta_points, cf_expand,
                                diophantine_check, er_estimate, er_tail, frac, frac_multiples,
                                gap_structure, good_denominators, indifference_admissible,
                                indifference_check, parse_frequency, ratio_table, torus_norm)
from monoloc.errors import RationalAlphaError


def test_golden_expansion():
    cf = cf_expand((math.sqrt(5) - 1) / 2, 10)
    assert cf.coeffs == (1,) * 10
    assert list(cf.q) == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]


def test_silver_expansion():
    cf = cf_expand(math.sqrt(2) - 1, 6)
    assert cf.coeffs == (2,) * 6
    assert list(cf.q) == [1, 2, 5, 12, 29, 70, 169]


def test_rational_rejected():
    with pytest.raises(RationalAlphaError):
        cf_expand(0.5, 5)


def test_rule_frequencies_match_float_expansion():
    assert GOLDEN.cf(30).q == cf_expand(GOLDEN.alpha_mp, 30).q
    assert SILVER.cf(20).coeffs == (2,) * 20


def test_parse_frequency_cf_list_repeats():
    f = parse_frequency("cf:[1,2]")
    assert [f.coefficient(k) for k in range(1, 6)] == [1, 2, 1, 2, 1]
    g = parse_frequency("cf:[3;1]")
    assert [g.coefficient(k) for k in range(1, 5)] == [3, 1, 1, 1]


def test_torus_norm_examples():
    assert torus_norm(0, GOLDEN) == 0.0
    assert torus_norm(3, GOLDEN) == pytest.approx(0.1458980337503155, abs=1e-12)
    cf = GOLDEN.cf(10)
    # ||q_n alpha|| = 1 / (t_{n+1} q_n + q_{n-1})
    t4 = float(cf.tails[3])
    assert torus_norm(3, GOLDEN) == pytest.approx(1 / (t4 * 3 + 2), rel=1e-12)


def test_convergent_error_sign_alternates():
    cf = GOLDEN.cf(20)
    a = mpmath.mpf(GOLDEN.alpha_mp)
    for k in range(1, 15):
        assert (-1) ** k * (cf.q[k] * a - cf.p[k]) > 0


def test_er_estimate_golden():
    cf = GOLDEN.cf(20)
    assert er_estimate(cf) == pytest.approx(1 / 3)
    assert er_tail(cf) == pytest.approx(0.381966, abs=1e-4)


def test_er_huge_coefficient_near_zero():
    f = parse_frequency("cf:[1;1,1,100,1]")
    assert er_estimate(f.cf(12)) < 0.02


@given(st.lists(st.integers(1, 50), min_size=6, max_size=12))
def test_er_estimate_at_most_half(coeffs):
    assert er_estimate(parse_frequency("cf:[" + ",".join(map(str, coeffs)) + "]").cf(20)) <= 0.5


def test_good_denominators():
    cf = GOLDEN.cf(20)
    g = good_denominators(cf, 0.4)
    assert 1 not in g and g[:5] == [2, 3, 5, 8, 13]
    # q_{k-1}/q_{k+1} for golden is 1/2, 1/3, 2/5, 3/8, 5/13, ...: only 1/3 is below 0.35
    assert good_denominators(cf, 0.35) == [2]
    assert good_denominators(cf, 0.999) == list(cf.q[1:cf.depth])
    assert all(r <= Fraction(1, 2) for _, _, r in ratio_table(cf))


def test_diophantine():
    cf = GOLDEN.cf(40)
    assert diophantine_check(cf, DiophantineParams(0.3, 1.0, 10**5), GOLDEN).holds
    r = diophantine_check(cf, DiophantineParams(0.5, 1.0, 10**5), GOLDEN)
    assert not r.holds and r.worst_ratio < 0.5
    # q ||q alpha|| tends to 1/sqrt(5) along the convergents
    assert 10946 * torus_norm(10946, GOLDEN) == pytest.approx(1 / math.sqrt(5), abs=1e-6)
    with pytest.raises(ValueError):
        DiophantineParams(0.0, 1.0, 10)


def test_beta_points_small():
    assert list(beta_points(1, GOLDEN).values) == [0.0]
    b = beta_points(3, GOLDEN)
    assert b.values == pytest.approx([0.0, 0.3819660112501051, 0.7639320225002102], abs=1e-12)


def test_beta_sites_permutation():
    b = beta_points(13, GOLDEN)
    assert sorted(b.sites) == list(range(13))
    assert np.all(np.diff(b.values) > 0)


@pytest.mark.parametrize("k", range(2, 12))
def test_gap_structure_two_lengths(k):
    cf = GOLDEN.cf(20)
    g = gap_structure(cf, k, GOLDEN)
    assert g.large_count + g.small_count == cf.q[k]
    assert g.gaps.sum() == pytest.approx(1.0)


def test_indifference_example():
    cf = GOLDEN.cf(20)
    r = indifference_check(0.5, 5, cf, GOLDEN)
    assert not r.skipped and r.difference <= 1 / 13


def test_indifference_sweep():
    cf = GOLDEN.cf(20)
    xs = np.random.default_rng(1).random(10_000)
    for k in range(1, 13):
        adm = indifference_admissible(xs, k, cf)
        shift = frac(xs[adm] + float(frac_multiples(GOLDEN, [cf.q[k]])[0]))
        assert np.all(np.abs(shift - xs[adm]) <= 1 / cf.q[k + 1] + 1e-15)


def test_indifference_excluded_zone_skipped():
    cf = GOLDEN.cf(20)
    # k even excludes the right end of the circle, k odd the left end
    assert indifference_check(0.999, 4, cf, GOLDEN).skipped
    assert indifference_check(0.001, 5, cf, GOLDEN).skipped


@settings(max_examples=50)
@given(st.integers(-10**6, 10**6))
def test_frac_multiples_against_mpmath(m):
    with mpmath.workdps(40):
        ref = float((m * GOLDEN.alpha_mp) % 1)
    d = abs(float(frac_multiples(GOLDEN, [m])[0]) - ref)
    assert min(d, 1 - d) < 1e-12
