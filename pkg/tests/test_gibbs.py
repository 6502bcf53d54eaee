import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leeyang.errors import NoCouplings, NonSpinHalf, TooManySites, VanishingPartition
from leeyang.gibbs import (
    Geometry,
    InteractionSpec,
    chain,
    expectations,
    family_stats,
    free_partition,
    fugacity_poly,
    fugacity_prefactor,
    partition_function,
    periodic_resize,
    random_spec,
    ring,
    torus,
    translation_classes,
)
from leeyang.measures import DiscreteEvenMeasure
from leeyang.polycore import ma_eval


def brute_Z(spec, h, obs=None):
    """Direct sum over the product support."""
    pts = spec.measure.support()
    ws = spec.measure.weights()
    hv = np.broadcast_to(np.asarray(h, dtype=complex), (spec.nsites,))
    Z = 0j
    num = 0j
    for idx in itertools.product(range(pts.size), repeat=spec.nsites):
        x = pts[list(idx)]
        w = np.prod(ws[list(idx)])
        e = sum(J * np.prod([x[i] for i in range(spec.nsites) if A >> i & 1]) for A, J in spec.couplings)
        w = w * np.exp(e + np.dot(hv, x))
        Z += w
        if obs is not None:
            num += w * np.prod([x[i] for i in obs])
    return Z if obs is None else num / Z


def test_two_site_closed_form():
    J, h = 0.7 - 0.2j, 0.3 + 0.5j
    spec = InteractionSpec(2, (((0, 1), J),), DiscreteEvenMeasure.spin_half())
    want = 0.25 * (np.exp(J + 2 * h) + np.exp(J - 2 * h) + 2 * np.exp(-J))
    assert abs(partition_function(spec, h) - want) < 1e-14
    m = expectations(spec, h, [[0]])[0]
    assert abs(m - 0.25 * (np.exp(J + 2 * h) - np.exp(J - 2 * h)) / want) < 1e-14


def test_enumeration_matches_brute_spin_one():
    rng = np.random.default_rng(5)
    spec = random_spec(rng, 4, 0.6, (0, 0.8), triple_prob=0.3, measure=DiscreteEvenMeasure.spin_s(1))
    h = 0.4 - 0.7j
    assert abs(partition_function(spec, h) - brute_Z(spec, h)) < 1e-12 * abs(brute_Z(spec, h))
    assert abs(expectations(spec, h, [[0, 2]])[0] - brute_Z(spec, h, [0, 2])) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_fugacity_contract(seed, h):
    spec = random_spec(np.random.default_rng(seed), 5, 0.5, (-0.5, 1), triple_prob=0.2)
    P = fugacity_poly(spec)
    lhs = partition_function(spec, h)
    rhs = fugacity_prefactor(spec, h) * ma_eval(P, [np.exp(-2 * h)] * 5)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_fugacity_requires_ising():
    with pytest.raises(NonSpinHalf):
        fugacity_poly(ring(4, 0.3, DiscreteEvenMeasure.spin_s(1)))
    with pytest.raises(TooManySites):
        fugacity_poly(ring(21, 0.3))


def test_free_partition_and_vanishing():
    spec = ring(4, 0.5)
    assert abs(free_partition(spec, 0.2) - np.cosh(0.2) ** 4) < 1e-14
    # single spin at h = i pi / 2 has Z = cos(pi/2) = 0
    lone = InteractionSpec(2, (((0, 1), 0.0),), DiscreteEvenMeasure.spin_half())
    with pytest.raises(VanishingPartition):
        expectations(lone, 1j * math.pi / 2, [[0]])


def test_geometry():
    g = Geometry((4, 3))
    assert g.size == 12
    assert g.index(g.coords(7)) == 7
    assert g.distance(0, g.index((3, 0))) == 1
    assert Geometry((5,), periodic=False).distance(0, 4) == 4


def test_builders_and_family_stats():
    r = ring(6, 0.4)
    st_ = family_stats(r, 0.4)
    assert (st_.q, st_.v) == (2, 1)
    assert math.isclose(st_.R0, math.exp(-0.8) / 8)
    t = torus((3, 3), 0.2)
    s2 = family_stats(t)
    assert (s2.q, s2.v) == (4, 2)
    assert len(t.couplings) == 18
    assert len(chain(5, 1.0).couplings) == 4
    assert len(translation_classes(t)) == 2
    with pytest.raises(NoCouplings):
        family_stats(InteractionSpec(3, (), DiscreteEvenMeasure.spin_half()))


def test_duplicate_couplings_merge_and_json_roundtrip():
    spec = InteractionSpec(3, (((0, 1), 0.2), ((1, 0), 0.3), ((0, 1, 2), 1j)), DiscreteEvenMeasure.spin_s(1.5), None, 0.5)
    assert dict(spec.couplings)[0b011] == 0.5
    again = InteractionSpec.from_json(json.dumps(spec.to_dict()))
    assert again == spec
    with pytest.raises(ValueError):
        InteractionSpec(2, (((0,), 1.0),), DiscreteEvenMeasure.spin_half())


def test_periodic_resize_keeps_classes():
    r = periodic_resize(ring(6, 0.3), (10,))
    assert r.nsites == 10 and len(r.couplings) == 10
    assert all(J == 0.3 for _, J in r.couplings)
