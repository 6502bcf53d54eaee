"""Finite-volume correlation functions at complex field and the inequalities they obey.

``f(j_1..j_n; h) = <x_{j_1} ... x_{j_n}>`` is computed by inserting the spin
product into the enumeration sum (the exact counterpart of differentiating Z
in the site fields). Checks in this module are numerical falsifiers of the
ratio positivity, derivative positivity, and two-sided growth bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import alpha
from .errors import VanishingPartition
from .gibbs import VANISH_REL, InteractionSpec, _fields, expectations, weighted_sums
from .measures import L_constant, pn_check


@dataclass
class CorrelationValue:
    value: complex
    lower: float = float("nan")
    upper: float = float("nan")

    @property
    def has_bounds(self) -> bool:
        return not (math.isnan(self.lower) or math.isnan(self.upper))


def _uniform(h) -> complex | None:
    f = np.asarray(h, dtype=complex)
    if f.ndim == 0:
        return complex(f)
    return complex(f[0]) if np.all(f == f[0]) else None


def sandwich_bounds(spec: InteractionSpec, n: int, h: complex) -> tuple[float, float]:
    """(alpha(h)^-n L^n, alpha(h)^n S^n) for an n-point function at uniform field h."""
    a = alpha(h)
    L = L_constant(spec.measure)
    S = spec.measure.max_abs
    return a**-n * L**n, a**n * S**n


def correlation(spec: InteractionSpec, sites, h=None) -> CorrelationValue:
    """<prod x_j> over ``sites`` (repeats allowed) at field ``h`` (scalar or per-site).

    Bounds are filled in when the field is uniform with Re h > 0 and the
    couplings are real and nonnegative.
    """
    sites = list(sites)
    if not sites:
        raise ValueError("need at least one site")
    if any(not 0 <= s < spec.nsites for s in sites):
        raise IndexError(f"site out of range in {sites}")
    h = spec.field if h is None else h
    val = complex(expectations(spec, h, [sites])[0])
    hu = _uniform(h)
    if hu is not None and hu.real > 0 and spec.is_ferromagnetic():
        lo, hi = sandwich_bounds(spec, len(sites), hu)
        return CorrelationValue(val, lo, hi)
    return CorrelationValue(val)


def prefix_correlations(spec: InteractionSpec, sites, h) -> np.ndarray:
    """[f(j_1), f(j_1, j_2), ..., f(j_1..j_n)] from a single enumeration pass."""
    sites = list(sites)
    return expectations(spec, h, [sites[: m + 1] for m in range(len(sites))])


# ---------------------------------------------------------------------------
# ratio positivity


@dataclass
class CheckReport:
    name: str
    passed: bool
    checks: int
    violations: int
    min_value: float
    rows: list = field(default_factory=list, repr=False)
    extras: dict = field(default_factory=dict)


def _require_newman(spec: InteractionSpec, hs):
    if not spec.is_ferromagnetic():
        raise ValueError("ratio positivity is claimed for real nonnegative couplings only")
    if not pn_check(spec.measure).is_pn:
        raise ValueError("ratio positivity is claimed for PN measures only")
    if any(complex(h).real <= 0 for h in hs):
        raise ValueError("every field sample must have Re h > 0")


def newman_ratio_check(spec: InteractionSpec, sites, h_samples, all_orders: bool = False) -> CheckReport:
    """Re f(j_1..j_m)/f(j_1..j_{m-1}) > 0 for each prefix m and each field sample.

    With ``all_orders`` every permutation of ``sites`` is checked too (only
    for up to five sites).
    """
    hs = [complex(h) for h in h_samples]
    _require_newman(spec, hs)
    sites = list(sites)
    orders = [tuple(sites)]
    if all_orders:
        if len(sites) > 5:
            raise ValueError("all_orders is limited to five sites")
        orders = sorted(set(itertools.permutations(sites)))
    rows = []
    worst = math.inf
    bad = 0
    count = 0
    for h in hs:
        row_min = math.inf
        for order in orders:
            f = prefix_correlations(spec, order, h)
            prev = 1.0
            for m in range(len(order)):
                if abs(prev) == 0:
                    raise VanishingPartition(f"prefix correlation vanished at h = {h}")
                re = (f[m] / prev).real
                row_min = min(row_min, re)
                count += 1
                if not re > 0:
                    bad += 1
                prev = f[m]
        rows.append((h, row_min))
        worst = min(worst, row_min)
    return CheckReport("newman_ratio", bad == 0, count, bad, float(worst), rows)


# ---------------------------------------------------------------------------
# derivative positivity


def _weighted_product_sum(spec, h, sites) -> complex:
    """Unnormalized sum of weight times the spin product, i.e. the mixed h-derivative of Z."""
    shift, _, sums, _ = weighted_sums(spec, h, [list(sites)])
    return complex(sums[0] * np.exp(shift))


def derivative_positivity_check(spec: InteractionSpec, sites, h, delta: float = 1e-5, directions=None) -> CheckReport:
    """d|F|^2 / d(Re h_j) > 0 for F = mixed derivative of Z in the fields of ``sites``.

    The centered finite difference in Re h_j is compared with the analytic
    value 2 |F|^2 Re(d_j F / F), where d_j F inserts one more spin at j.
    """
    hvec = _fields(spec, h)
    if np.any(hvec.real <= 0):
        raise ValueError("derivative positivity needs Re h_j > 0 at every site")
    sites = list(sites)
    directions = range(spec.nsites) if directions is None else directions
    F = _weighted_product_sum(spec, hvec, sites)
    if abs(F) == 0:
        raise VanishingPartition("the derivative of Z vanishes at this field")
    rows = []
    bad = 0
    worst_rel = 0.0
    worst = math.inf
    for j in directions:
        dF = _weighted_product_sum(spec, hvec, sites + [j])
        analytic = 2 * abs(F) ** 2 * (dF / F).real
        e = np.zeros(spec.nsites)
        e[j] = delta
        up = abs(_weighted_product_sum(spec, hvec + e, sites)) ** 2
        dn = abs(_weighted_product_sum(spec, hvec - e, sites)) ** 2
        fd = (up - dn) / (2 * delta)
        rel = abs(fd - analytic) / abs(analytic)
        worst_rel = max(worst_rel, rel)
        worst = min(worst, analytic / abs(F) ** 2)
        ok = analytic > 0 and fd > 0 and rel <= 1e-4
        bad += not ok
        rows.append((j, fd, analytic, rel))
    return CheckReport("derivative_positivity", bad == 0, len(rows), bad, float(worst), rows, {"max_rel_fd_error": worst_rel})


# ---------------------------------------------------------------------------
# two-sided bounds


def sandwich_check(spec: InteractionSpec, sites, h_grid, slack: float = 1e-10) -> CheckReport:
    """alpha^-n L^n <= |f| <= alpha^n S^n on the grid, plus the unit-field chain.

    At h = 1 it also checks f(j_1..j_n) >= prod_k f(j_k) >= L^n and f <= S^n.
    """
    if not spec.is_ferromagnetic():
        raise ValueError("sandwich bounds need real nonnegative couplings")
    sites = list(sites)
    n = len(sites)
    rows = []
    bad = 0
    margin = math.inf
    for h in h_grid:
        h = complex(h)
        if h.real <= 0:
            raise ValueError("grid points must have Re h > 0")
        f = abs(complex(expectations(spec, h, [sites])[0]))
        lo, hi = sandwich_bounds(spec, n, h)
        ok = lo - slack <= f <= hi + slack
        bad += not ok
        margin = min(margin, f - lo, hi - f)
        rows.append((h, f, lo, hi))
    vals = expectations(spec, 1.0, [sites] + [[s] for s in sites]).real
    L = L_constant(spec.measure)
    S = spec.measure.max_abs
    joint, singles = float(vals[0]), vals[1:]
    prod = float(np.prod(singles))
    chain_ok = joint >= prod - slack and prod >= L**n - slack and joint <= S**n + slack
    extras = {"f_at_1": joint, "prod_singles_at_1": prod, "L^n": L**n, "S^n": S**n, "chain_ok": chain_ok}
    bad += not chain_ok
    return CheckReport("sandwich", bad == 0, len(rows) + 1, bad, float(margin), rows, extras)


def default_grid(nre: int = 5, nim: int = 5, re_max: float = 2.0, im_max: float = 2.0) -> list[complex]:
    """nre x nim grid with Re h in (0, re_max] (left endpoint excluded) and Im h in [-im_max, im_max]."""
    res = np.linspace(re_max / nre, re_max, nre)
    ims = np.linspace(-im_max, im_max, nim)
    return [complex(r, i) for r in res for i in ims]


def is_vanishing(spec: InteractionSpec, h) -> bool:
    _, Z, _, absz = weighted_sums(spec, h)
    return abs(Z) <= VANISH_REL * absz
