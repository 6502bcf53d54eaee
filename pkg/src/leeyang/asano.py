"""Asano contraction of single-coupling factors with zero-free disk tracking.

Each coupling A contributes a factor R_A in private copies of its site
variables. R_A has no zero while every copy stays in the open disk of radius
r_A = 1 / (2^|A| e^{2 J0(A)}). Contracting copies multiplies the disk radii,
so the fully contracted polynomial is nonzero whenever |z_x| is below the
product of r_A over the couplings through x.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import roots
from .errors import NoCouplings, TooManySites
from .gibbs import (
    InteractionSpec,
    _require_spin_half,
    canonical_class,
    coupling_bounds,
    family_stats,
    fugacity_poly,
    r_a_factor,
)
from .polycore import MultiAffinePoly, ma_contract, ma_diagonal, ma_eval_many, ma_relabel, members

AUDIT_MAX_SITES = 14


def factor_radius(A: int, J0: float) -> float:
    """Radius of the polydisc on which R_A cannot vanish for any complex |J(A)| <= J0."""
    if J0 < 0:
        raise ValueError("J0 must be nonnegative")
    return 1.0 / (2.0 ** bin(A).count("1") * math.exp(2 * J0))


@dataclass
class ContractionStep:
    factor: list[int]
    radius: float
    contractions: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class ZeroFreeCertificate:
    radii: list[float]
    steps: list[ContractionStep]
    h_radius: float | None = None

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "h_radius": self.h_radius,
            "steps": [asdict(s) for s in self.steps],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ZeroFreeCertificate:
        steps = [ContractionStep(list(s["factor"]), float(s["radius"]), [tuple(c) for c in s.get("contractions", [])]) for s in d.get("steps", [])]
        return cls([float(r) for r in d["radii"]], steps, d.get("h_radius"))

    def scaled(self, factor: float) -> ZeroFreeCertificate:
        return ZeroFreeCertificate([r * factor for r in self.radii], list(self.steps), self.h_radius)


def contract_model(spec: InteractionSpec, J0=None) -> tuple[MultiAffinePoly, ZeroFreeCertificate]:
    """Build the fugacity polynomial as a product of R_A factors and Asano contractions.

    Factors are taken in ascending bitmask order. A site seen for the first
    time keeps its own variable; later copies live in scratch variables above
    ``nsites`` and are contracted into it immediately. Sites in no coupling get
    the free factor (1 + z), zero-free on the unit disk.
    """
    _require_spin_half(spec)
    n = spec.nsites
    width = max((bin(A).count("1") for A, _ in spec.couplings), default=0)
    nvars = n + width
    bounds = coupling_bounds(spec, J0)
    P = MultiAffinePoly.constant(nvars)
    radii = [1.0] * n
    seen: set[int] = set()
    steps = []
    for (A, J), b in zip(spec.couplings, bounds):
        sites = members(A)
        mapping = {}
        pending = []
        for t, s in enumerate(sites):
            if s in seen:
                mapping[s] = n + t
                pending.append((s, n + t))
        R = ma_relabel(r_a_factor(A, J, nvars), mapping)
        P = P * R
        for s, copy in pending:
            P = ma_contract(P, s, copy)
        r = factor_radius(A, b)
        for s in sites:
            radii[s] *= r
        seen.update(sites)
        steps.append(ContractionStep(sites, r, pending))
    for s in range(n):
        if s not in seen:
            P = P * MultiAffinePoly(nvars, {0: 1.0, 1 << s: 1.0})
            steps.append(ContractionStep([s], 1.0, []))
    P = MultiAffinePoly(n, keys=P.keys, values=P.values)
    return P, ZeroFreeCertificate(radii, steps)


@dataclass(frozen=True)
class AnalyticityRegion:
    """Fields with |e^{-2h}| < h_radius, couplings with |J(A)| < coupling_box[A]."""

    h_radius: float
    coupling_box: dict

    @property
    def re_h_threshold(self) -> float:
        """The region in h is Re h > this value."""
        return -math.log(self.h_radius) / 2

    def contains(self, h: complex) -> bool:
        return abs(np.exp(-2 * complex(h))) < self.h_radius


def certify_region(spec: InteractionSpec, J0=None) -> AnalyticityRegion:
    """Volume-independent analyticity region from q and I0 alone: |e^{-2h}| < 1/(q I0)."""
    if not spec.couplings:
        raise NoCouplings("no couplings: nothing to certify")
    stats = family_stats(spec, J0)
    bounds = coupling_bounds(spec, J0)
    box = {}
    for (A, _), b in zip(spec.couplings, bounds):
        key = canonical_class(spec.geometry, A) if spec.geometry is not None and spec.geometry.periodic else A
        box[key] = b
    return AnalyticityRegion(stats.R0, box)


@dataclass
class AuditReport:
    passed: bool
    min_radius: float
    min_root_modulus: float
    roots_inside: int
    min_rel_value: float
    samples_inside_zero: int
    samples: int

    def metrics(self) -> dict:
        return asdict(self)


def audit_certificate(spec: InteractionSpec, cert: ZeroFreeCertificate, samples: int = 256, seed: int = 0) -> AuditReport:
    """Try to falsify a certificate.

    Checks the roots of the diagonal polynomial against the smallest radius
    (1e-9 slack) and evaluates the multivariate polynomial at uniformly random
    points of the polydisc, flagging |P| < 1e-12 * sum_X |c_X| r^X.
    """
    if spec.nsites > AUDIT_MAX_SITES:
        raise TooManySites(f"audit is limited to {AUDIT_MAX_SITES} sites")
    P = fugacity_poly(spec)
    radii = np.asarray(cert.radii, dtype=float)
    rmin = float(radii.min())
    zs = roots(ma_diagonal(P))
    mods = np.abs(zs)
    inside = int(np.count_nonzero(mods < rmin - 1e-9))
    rng = np.random.default_rng(seed)
    n = spec.nsites
    pts = radii[None, :] * np.sqrt(rng.uniform(0, 1, (samples, n))) * np.exp(2j * np.pi * rng.uniform(0, 1, (samples, n)))
    vals = np.abs(ma_eval_many(P, pts))
    bits = ((P.keys[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(bool)
    scale = float(np.sum(np.abs(P.values) * np.prod(np.where(bits, radii[None, :], 1.0), axis=1)))
    rel = vals / scale
    zeros = int(np.count_nonzero(rel < 1e-12))
    return AuditReport(
        passed=inside == 0 and zeros == 0,
        min_radius=rmin,
        min_root_modulus=float(mods.min()),
        roots_inside=inside,
        min_rel_value=float(rel.min()) if rel.size else float("nan"),
        samples_inside_zero=zeros,
        samples=samples,
    )


def _factor_min_root(B: int, J: complex) -> float:
    return float(np.abs(roots(ma_diagonal(r_a_factor(B, J)))).min())


def epsilon_rho_search(B: int, rho: float, tol: float = 1e-8, nphase: int = 16, eps_max: float = 10.0) -> float:
    """Largest eps with every root of diag R_B(J) of modulus >= rho for sampled |J| <= eps.

    The coupling disk is sampled on ``nphase`` phases at radii eps/4, eps/2,
    3eps/4, eps; the answer is found by bisection to ``tol``.
    """
    if not 0 < rho < 1:
        raise ValueError("need 0 < rho < 1")
    size = bin(B).count("1")
    if size < 2:
        raise ValueError("need |B| >= 2")
    if nphase < 16:
        raise ValueError("use at least 16 phases")
    phases = np.exp(2j * np.pi * np.arange(nphase) / nphase)

    def ok(eps):
        for f in (0.25, 0.5, 0.75, 1.0):
            for ph in phases:
                if _factor_min_root(B, f * eps * ph) < rho:
                    return False
        return True

    if ok(eps_max):
        return eps_max
    lo, hi = 0.0, eps_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
