import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leeyang.asano import (
    ZeroFreeCertificate,
    audit_certificate,
    certify_region,
    contract_model,
    epsilon_rho_search,
    factor_radius,
)
from leeyang.gibbs import InteractionSpec, fugacity_poly, r_a_factor, random_spec, ring, torus
from leeyang.measures import DiscreteEvenMeasure
from leeyang.polycore import ma_diagonal
from leeyang.analysis import roots


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 7))
def test_contraction_equals_fugacity_polynomial(seed, n):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, n, 0.5, (-1, 1), triple_prob=0.15)
    P, _ = contract_model(spec)
    assert P.max_coeff_diff(fugacity_poly(spec)) <= 1e-12


def test_isolated_sites_get_free_factor():
    spec = InteractionSpec(4, (((0, 1), 0.5),), DiscreteEvenMeasure.spin_half())
    P, cert = contract_model(spec)
    assert P.max_coeff_diff(fugacity_poly(spec)) <= 1e-15
    assert cert.radii[2] == cert.radii[3] == 1.0


def test_factor_radius_bounds_single_factor_roots():
    # pair factor diag is 1 + 2 e^{-2J} z + z^2; worst root modulus over |J| <= J0 is at J = -J0
    for J0 in [0.0, 0.3, 1.0]:
        r = factor_radius(0b11, J0)
        for ph in np.exp(2j * np.pi * np.arange(32) / 32):
            zs = roots(ma_diagonal(r_a_factor(0b11, J0 * ph)))
            assert np.abs(zs).min() >= r


def test_certificate_radii_ring():
    _, cert = contract_model(ring(6, 0.4), 0.4)
    want = (1 / (4 * math.exp(0.8))) ** 2
    assert np.allclose(cert.radii, want, rtol=1e-14)
    again = ZeroFreeCertificate.from_dict(cert.to_dict())
    assert again.radii == cert.radii and len(again.steps) == 6


def test_region_matches_closed_form():
    for beta in [0.1, 0.5, 1.0]:
        reg = certify_region(ring(8, beta))
        assert math.isclose(reg.h_radius, math.exp(-2 * beta) / 8, rel_tol=1e-14)
        assert math.isclose(reg.re_h_threshold, (math.log(8) + 2 * beta) / 2, rel_tol=1e-14)
        assert reg.contains(reg.re_h_threshold + 0.01 + 3j)
        assert not reg.contains(reg.re_h_threshold - 0.01)


@pytest.mark.parametrize("seed", range(5))
def test_audit_passes_with_triples(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, 7, 0.4, (-0.6, 0.6), triple_prob=0.1)
    _, cert = contract_model(spec)
    assert audit_certificate(spec, cert, samples=200, seed=seed).passed


def test_audit_catches_inflated_radii():
    spec = ring(6, -1.0)
    _, cert = contract_model(spec)
    assert audit_certificate(spec, cert).passed
    rep = audit_certificate(spec, cert.scaled(10))
    assert not rep.passed and rep.roots_inside > 0


def epsilon_closed_form(rho):
    # J = -eps real makes the smaller root of 1 + 2 e^{2 eps} z + z^2 have modulus rho
    return math.log((rho + 1 / rho) / 2) / 2


@pytest.mark.parametrize("rho", [0.5, 0.9, 0.99])
def test_epsilon_rho_matches_quadratic(rho):
    eps = epsilon_rho_search(0b11, rho)
    assert abs(eps - epsilon_closed_form(rho)) < 1e-6


def test_epsilon_rho_monotone_and_frozen():
    es = [epsilon_rho_search(0b11, r) for r in (0.3, 0.5, 0.9, 0.99)]
    assert all(a > b for a, b in zip(es, es[1:]))
    assert abs(es[1] - 0.11157177565710485) < 1e-7
    with pytest.raises(ValueError):
        epsilon_rho_search(0b11, 1.0)


def test_torus_certificate_audit():
    spec = torus((2, 3), 0.3)
    _, cert = contract_model(spec)
    assert audit_certificate(spec, cert, samples=128).passed


def test_factor_radius_values():
    assert factor_radius(0b11, 0) == 0.25
    assert math.isclose(factor_radius(0b11, 1), 0.033833820809153176, rel_tol=1e-14)
    assert factor_radius(0b111, 0) == 0.125
    with pytest.raises(ValueError):
        factor_radius(0b11, -1)


def test_single_bond_certificate():
    beta = 0.7
    spec = ring(2, beta)
    _, cert = contract_model(spec, beta)
    assert np.allclose(cert.radii, 1 / (4 * math.exp(2 * beta)))
    zs = roots(ma_diagonal(fugacity_poly(spec)))
    assert np.allclose(np.abs(zs), 1)


def test_torus_region():
    beta = 0.25
    reg = certify_region(torus((4, 4), beta), beta)
    assert math.isclose(reg.h_radius, math.exp(-2 * beta) / 16, rel_tol=1e-14)
