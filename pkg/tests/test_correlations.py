import math

import numpy as np
import pytest

from leeyang.correlations import (
    correlation,
    default_grid,
    derivative_positivity_check,
    newman_ratio_check,
    prefix_correlations,
    sandwich_check,
)
from leeyang.gibbs import chain, random_spec, ring
from leeyang.measures import DiscreteEvenMeasure
from leeyang.ursell import transfer_matrix_ring


def test_ring_correlation_matches_transfer_matrix():
    h = 0.8 + 0.6j
    m, two = transfer_matrix_ring(10, 0.35, h)
    spec = ring(10, 0.35)
    assert abs(correlation(spec, [0], h).value - m) < 1e-13
    for d in range(1, 6):
        assert abs(correlation(spec, [0, d], h).value - two[d]) < 1e-13


def test_repeated_sites_square_to_one():
    assert abs(correlation(ring(5, 0.2), [2, 2], 0.3 + 1j).value - 1) < 1e-13


def test_bounds_attached_only_when_claimed():
    assert correlation(ring(5, 0.2), [0], 1 + 1j).has_bounds
    assert not correlation(ring(5, -0.2), [0], 1 + 1j).has_bounds
    assert not correlation(ring(5, 0.2), [0], -1 + 1j).has_bounds


def test_prefix_correlations():
    spec = ring(6, 0.4)
    f = prefix_correlations(spec, [0, 1, 3], 0.5)
    assert abs(f[1] - correlation(spec, [0, 1], 0.5).value) < 1e-14


def test_grid_excludes_axis():
    g = default_grid()
    assert len(g) == 25 and min(h.real for h in g) > 0


@pytest.mark.parametrize("measure", [DiscreteEvenMeasure.spin_half(), DiscreteEvenMeasure.spin_s(1)])
def test_newman_on_random_models(measure):
    rng = np.random.default_rng(11)
    for _ in range(5):
        spec = random_spec(rng, 6, 0.5, (0, 1), triple_prob=0.1, measure=measure)
        sites = list(rng.choice(6, size=3, replace=False))
        rep = newman_ratio_check(spec, sites, default_grid())
        assert rep.passed and rep.min_value > 0


def test_newman_all_orders_and_preconditions():
    assert newman_ratio_check(ring(6, 0.4), [0, 2, 3], default_grid(3, 3), all_orders=True).passed
    with pytest.raises(ValueError):
        newman_ratio_check(ring(6, -0.4), [0, 1], [1 + 0j])
    with pytest.raises(ValueError):
        newman_ratio_check(ring(6, 0.4), [0, 1], [-1 + 0j])
    with pytest.raises(ValueError):
        newman_ratio_check(ring(4, 0.4, DiscreteEvenMeasure.three_point(0.3)), [0], [1 + 0j])


def test_derivative_positivity():
    spec = random_spec(np.random.default_rng(2), 5, 0.6, (0, 1))
    rep = derivative_positivity_check(spec, [0, 3], 0.7 + 0.9j)
    assert rep.passed and rep.extras["max_rel_fd_error"] < 1e-6
    with pytest.raises(ValueError):
        derivative_positivity_check(spec, [0], -0.1)


@pytest.mark.parametrize("sites", [[0], [0, 2], [0, 1, 3]])
def test_sandwich(sites):
    rep = sandwich_check(chain(5, 0.6, DiscreteEvenMeasure.spin_s(1)), sites, default_grid())
    assert rep.passed
    assert rep.extras["chain_ok"]
    assert rep.extras["f_at_1"] >= rep.extras["prod_singles_at_1"] - 1e-12


def test_sandwich_single_site_is_tight_at_one():
    # free spin-1/2 at h = 1 has <x> = tanh 1 = L exactly
    spec = ring(3, 0.0)
    rep = sandwich_check(spec, [0], [1 + 0j])
    assert rep.passed and rep.min_value < 1e-12
    assert math.isclose(rep.extras["f_at_1"], math.tanh(1))
