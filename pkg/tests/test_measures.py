import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leeyang.errors import DegenerateMeasure, InvalidMeasure
from leeyang.measures import (
    DiscreteEvenMeasure,
    L_constant,
    laplace_poly,
    pn_check,
    site_moment,
    three_point_threshold,
)


def test_spin_half():
    mu = DiscreteEvenMeasure.spin_half()
    assert mu.is_spin_half()
    assert np.allclose(mu.support(), [-1, 1])
    assert pn_check(mu).is_pn
    assert math.isclose(L_constant(mu), math.tanh(1))


@pytest.mark.parametrize("s", [0.5, 1, 1.5, 2, 3, 5.5, 10])
def test_spin_s_is_pn(s):
    mu = DiscreteEvenMeasure.spin_s(s)
    assert mu.max_abs == s
    assert math.isclose(mu.weights().sum(), 1)
    v = pn_check(mu)
    assert v.is_pn and v.max_circle_deviation < 1e-8


def test_spin_one_L_value():
    # <x> at h = 1 for uniform weights on {-1, 0, 1}
    assert math.isclose(L_constant(DiscreteEvenMeasure.spin_s(1)), 2 * math.sinh(1) / (1 + 2 * math.cosh(1)), rel_tol=1e-13)
    assert abs(L_constant(DiscreteEvenMeasure.spin_s(1)) - 0.5752103826) < 1e-10


def three_point_pn_oracle(lam):
    # Q(w) = lam/2 w^2 + (1 - lam) w + lam/2: roots on the circle iff the discriminant is <= 0
    return (1 - lam) ** 2 - lam**2 <= 0


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 1.0))
def test_three_point_matches_quadratic(lam):
    if abs(lam - 0.5) < 1e-6:
        return
    assert pn_check(DiscreteEvenMeasure.three_point(lam)).is_pn == three_point_pn_oracle(lam)


def test_three_point_threshold_and_witness():
    assert abs(three_point_threshold() - 0.5) < 1e-9
    mu = DiscreteEvenMeasure.three_point(0.4)
    v = pn_check(mu)
    assert not v.is_pn
    assert abs(mu.laplace(v.witness)) < 1e-10
    assert abs(v.witness.real) > 1e-6


def test_laplace_poly_matches_direct_sum():
    mu = DiscreteEvenMeasure(((0.5, 0.1), (1.5, 0.3)), 0.2)
    assert mu.step == 0.5
    Q = laplace_poly(mu)
    for z in [0.3 + 0.2j, -1.1j, 2.0]:
        w = np.exp(mu.step * z)
        assert abs(mu.laplace(z) - w ** (-mu.half_degree) * Q(w)) < 1e-12


def test_incommensurate_atoms_get_fine_grid():
    mu = DiscreteEvenMeasure(((1.0, 0.25), (1.25, 0.25)))
    assert math.isclose(mu.step, 0.25)
    assert pn_check(mu).roots.size == 2 * mu.half_degree


def test_bad_measures():
    with pytest.raises(InvalidMeasure):
        DiscreteEvenMeasure(((1.0, -0.5),))
    with pytest.raises(InvalidMeasure):
        DiscreteEvenMeasure.three_point(0)
    with pytest.raises(DegenerateMeasure):
        pn_check(DiscreteEvenMeasure((), 1.0))


def test_site_moment_and_json_roundtrip():
    mu = DiscreteEvenMeasure.spin_s(1)
    h = 0.3 + 0.4j
    z0 = site_moment(mu, h, 0)
    assert abs(z0 - (1 + 2 * np.cosh(h)) / 3) < 1e-14
    assert abs(site_moment(mu, h, 1) - 2 * np.sinh(h) / 3) < 1e-14
    again = DiscreteEvenMeasure.from_json(__import__("json").dumps(mu.to_dict()))
    assert again == mu
    assert DiscreteEvenMeasure.from_dict({"type": "three_point", "lambda": 0.7}) == DiscreteEvenMeasure.three_point(0.7)
