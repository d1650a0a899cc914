import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monoloc.arithmetic import GOLDEN
from monoloc.errors import LipschitzViolation
from monoloc.potential import (MonotonePotential, OperatorSpec, blend, eval_periodic, parse_potential,
                               sample_orbit, sawtooth, validate_lipschitz)


def test_sawtooth_periodic_extension():
    v = sawtooth()
    assert eval_periodic(v, 1.25) == pytest.approx(0.25)
    assert eval_periodic(v, -0.25) == pytest.approx(0.75)
    assert v.gamma_minus == v.gamma_plus == 1.0


def test_validate_sawtooth():
    r = validate_lipschitz(sawtooth())
    assert r.min_slope == pytest.approx(1.0) and r.max_slope == pytest.approx(1.0)


def test_validate_blend():
    v = parse_potential("blend:0.5")
    assert (v.gamma_minus, v.gamma_plus) == (0.5, 1.5)
    r = validate_lipschitz(v)
    assert 0.5 <= r.min_slope and r.max_slope <= 1.5


def test_non_monotone_rejected():
    f = lambda x: np.asarray(x) + 0.3 * np.sin(2 * np.pi * np.asarray(x))
    v = MonotonePotential("wiggle", f, 0.1, 3.0)
    with pytest.raises(LipschitzViolation) as e:
        validate_lipschitz(v)
    assert 0 <= e.value.x <= 1 and 0 <= e.value.y <= 1


def test_pwl_parse():
    v = parse_potential("pwl:[(0,0),(0.5,0.25),(1,1)]")
    assert (v.gamma_minus, v.gamma_plus) == (0.5, 1.5)
    validate_lipschitz(v)
    with pytest.raises(ValueError):
        parse_potential("pwl:[(0,0),(0.5,0.6),(0.7,0.5),(1,1)]")


def test_unknown_potential():
    with pytest.raises(ValueError):
        parse_potential("cosine")


def test_sample_orbit():
    s = OperatorSpec(GOLDEN, 1.0, sawtooth(), 0.0)
    assert sample_orbit(s, 0, 3) == pytest.approx([0.0, 0.6180339887498949, 0.2360679774997898])
    assert np.all(sample_orbit(s.with_lam(0.0), 0, 50) == 0)


def test_negative_coupling_rejected():
    with pytest.raises(ValueError):
        OperatorSpec(GOLDEN, -1.0, sawtooth())


@given(st.floats(0, 0.99), st.floats(0, 1, exclude_max=True))
def test_blend_slopes(c, x):
    v = blend(c)
    d = float(v.derivative(x))
    assert v.gamma_minus - 1e-12 <= d <= v.gamma_plus + 1e-12
    assert 0 <= float(v(x)) < 1 + 1e-12
