import math

import numpy as np
import pytest

from leeyang.errors import RangeViolation, WindowTooSmall
from leeyang.gibbs import InteractionSpec, chain, expectations, random_spec, ring
from leeyang.measures import DiscreteEvenMeasure
from leeyang.ursell import (
    beta_derivative_vanishing,
    beta_series,
    mass_gap_fit,
    percus_check,
    set_partitions,
    transfer_matrix_1d,
    transfer_matrix_ring,
    truncated_two_point,
    ursell,
    ursell_finite_difference,
)


def test_set_partition_counts():
    # Bell numbers
    assert [sum(1 for _ in set_partitions(range(n))) for n in range(1, 7)] == [1, 2, 5, 15, 52, 203]


def test_low_order_ursell_functions():
    spec = random_spec(np.random.default_rng(4), 5, 0.6, (0, 0.8))
    h = 0.3 + 0.2j
    f = expectations(spec, h, [[0], [1], [0, 1]])
    assert abs(ursell(spec, [[0]], h) - f[0]) < 1e-14
    assert abs(ursell(spec, [[0], [1]], h) - (f[2] - f[0] * f[1])) < 1e-14


@pytest.mark.parametrize("obs", [[[0], [1]], [[0], [1], [2]], [[0], [1], [2], [3]], [[0, 2], [1], [3], [4]]])
def test_ursell_matches_finite_differences(obs):
    spec = random_spec(np.random.default_rng(9), 6, 0.5, (0, 0.7), measure=DiscreteEvenMeasure.spin_s(1))
    u = ursell(spec, obs, 0.4)
    fd = ursell_finite_difference(spec, obs, 0.4)
    assert abs(u - fd) <= 1e-5 * max(abs(u), 1e-8)


def test_percus_vanishing():
    mu = DiscreteEvenMeasure.spin_s(1)
    rep = percus_check(mu, [[1, 2], [3, 4]], p=0, l=5, R=1, h=0.3)
    assert rep.applicable and rep.passed and rep.separated
    # independent split without separation
    rep = percus_check(mu, [[0, 1]], p=0, l=5, R=1)
    assert rep.applicable and rep.passed
    # chain of overlapping sets spanning p to l: no claim
    rep = percus_check(mu, [[0, 1], [1, 2]], p=0, l=2, R=1)
    assert not rep.applicable
    rep = percus_check(mu, [[0, 3]], p=0, l=9, R=1)
    assert not rep.applicable


def test_ursell_nonzero_when_connected():
    mu = DiscreteEvenMeasure.spin_half()
    spec = InteractionSpec(3, (), mu)
    # x0 x1, x1 x2, x0 x2 all overlap: the Ursell function is not identically zero
    assert abs(ursell(spec, [[0, 1], [1, 2], [0, 2]], 0.5)) > 1e-3


def test_transfer_matrix_eigenvalues():
    J, h = 0.4, 0.7 + 0.3j
    T = np.array([[np.exp(J + h), np.exp(-J)], [np.exp(-J), np.exp(J - h)]])
    l1, l2 = transfer_matrix_1d(J, h)
    ev = np.linalg.eigvals(T)
    assert min(abs(ev - l1)) < 1e-12 and min(abs(ev - l2)) < 1e-12
    _, two = transfer_matrix_ring(8, J, h)
    assert abs(two[0] - 1) < 1e-13


def test_truncated_two_point_matches_transfer_matrix():
    n, J, h = 12, 0.3, 1.2 + 0.4j
    m, two = transfer_matrix_ring(n, J, h)
    spec = ring(n, J)
    for d in range(1, 6):
        assert abs(truncated_two_point(spec, 0, d, h) - (two[d] - m * m)) < 1e-13


@pytest.mark.parametrize("J,h", [(0.2, 1.0), (0.5, 1.0), (0.3, 1.5 + 0.5j)])
def test_mass_gap_fit_close_to_oracle(J, h):
    est = mass_gap_fit(ring(14, J), h)
    assert est.passed
    assert abs(est.m_fit - est.m_oracle) < 1e-2


def test_mass_gap_window_and_free_case():
    with pytest.raises(WindowTooSmall):
        mass_gap_fit(ring(5, 0.3), 1.0)
    est = mass_gap_fit(ring(8, 0.0), 1.0)
    assert est.m_fit == math.inf


def test_beta_series_against_finite_difference():
    spec = chain(5, 0.3)
    d = beta_series(spec, 0, 2, 2, 0.4)
    eps = 1e-3
    g = [truncated_two_point(spec.scaled(b), 0, 2, 0.4) for b in (-eps, 0, eps)]
    assert abs(d[0] - g[1]) < 1e-12
    # second derivative at beta = 0 for the scaled model, chain J=0.3 scaled by beta
    assert abs(d[2] - (g[0] - 2 * g[1] + g[2]) / eps**2) < 1e-5


def test_beta_derivatives_vanish_beyond_range():
    spec = chain(8, 0.4)
    for Q in (1, 2, 3):
        rep = beta_derivative_vanishing(spec, 0, Q + 1, Q, R=1, h=0.6)
        assert rep.passed
    # negative control: the next derivative is not zero
    d = beta_series(spec, 0, 1, 1, 0.6)
    assert abs(d[1]) > 1e-3
    with pytest.raises(RangeViolation):
        beta_derivative_vanishing(spec, 0, 2, 2, R=1)
