"""Ursell functions, Percus vanishing, truncated two-point functions and the mass gap.

Ursell functions are computed exactly from moments through the set-partition
(Moebius) formula

    u_n = sum_pi (-1)^{|pi|-1} (|pi|-1)! prod_{B in pi} < prod_{i in B} X_i >

with observables X_i = prod_{j in A_i} x_j. A finite-difference derivative of
the log generating function is kept as an independent cross-check.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import RangeViolation, VanishingPartition, WindowTooSmall
from .gibbs import VANISH_REL, InteractionSpec, _fields, blocks, expectations
from .measures import DiscreteEvenMeasure
from .polycore import members, varset

MAX_OBSERVABLES = 10
NOISE_FLOOR = 1e-12


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All set partitions of ``items`` (Bell-number many), blocks in first-element order."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def _sites(obs) -> list[int]:
    if isinstance(obs, (int, np.integer)):
        return members(int(obs))
    return list(obs)


def ursell(spec: InteractionSpec, observables: Sequence, h=None) -> complex:
    """Fully truncated correlation u_n(X_1, ..., X_n) at field ``h``.

    Each observable is a bitmask or a list of sites; X_i is the product of
    the spins it names.
    """
    obs = [_sites(o) for o in observables]
    n = len(obs)
    if not 1 <= n <= MAX_OBSERVABLES:
        raise ValueError(f"need 1..{MAX_OBSERVABLES} observables")
    subsets = [s for r in range(1, n + 1) for s in itertools.combinations(range(n), r)]
    products = [[j for i in s for j in obs[i]] for s in subsets]
    moments = dict(zip(subsets, expectations(spec, h, products)))
    total = 0j
    for part in set_partitions(range(n)):
        k = len(part)
        term = (-1) ** (k - 1) * math.factorial(k - 1)
        for b in part:
            term = term * moments[tuple(b)]
        total += term
    return complex(total)


def _log_generating(spec: InteractionSpec, h, obs: list[list[int]], ts: np.ndarray) -> np.ndarray:
    """log < exp(sum_i t_i X_i) > for each row t of ``ts``."""
    hv = _fields(spec, h)
    blks = list(blocks(spec))
    shift = max(float((b.log_prior + b.coupling + b.spins @ hv).real.max()) for b in blks)
    num = np.zeros(ts.shape[0], dtype=complex)
    den = 0j
    for b in blks:
        w = np.exp(b.log_prior + b.coupling + b.spins @ hv - shift)
        X = np.stack([np.prod(b.spins[:, o], axis=1) if o else np.ones(b.spins.shape[0]) for o in obs], axis=1)
        den += w.sum()
        num += np.exp(X @ ts.T).T @ w
    return np.log(num / den)


def ursell_finite_difference(spec: InteractionSpec, observables: Sequence, h=None, step: float = 0.2, levels: int = 6) -> complex:
    """Mixed derivative of the log generating function at t = 0 by centered differences.

    For each base step s in ``step * 2^-k`` (k < ``levels``) the differences at
    s, s/2 and s/4 are combined by two rounds of Richardson extrapolation
    (O(s^6) error). Large steps suffer when a zero of the generating function
    is near, small ones from cancellation, so the estimate is taken where two
    consecutive levels agree best.
    """
    obs = [_sites(o) for o in observables]
    n = len(obs)
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    parity = np.prod(signs, axis=1)

    def diff(eps):
        G = _log_generating(spec, h, obs, signs * eps)
        return np.sum(parity * G) / (2 * eps) ** n

    d = [diff(step / 2**k) for k in range(levels + 2)]
    est = []
    for k in range(levels):
        r1 = (4 * d[k + 1] - d[k]) / 3
        r2 = (4 * d[k + 2] - d[k + 1]) / 3
        est.append((16 * r2 - r1) / 15)
    k = min(range(levels - 1), key=lambda i: abs(est[i] - est[i + 1]))
    return complex(est[k + 1])


# ---------------------------------------------------------------------------
# Percus vanishing under product measure


@dataclass
class PercusReport:
    applicable: bool
    passed: bool
    value: complex | None
    separated: bool
    independent_split: bool
    note: str = ""


def _independent_split(obs: list[list[int]]) -> bool:
    """True when the observables fall into two or more groups with disjoint sites."""
    n = len(obs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(n), 2):
        if set(obs[i]) & set(obs[j]):
            parent[find(i)] = find(j)
    return len({find(i) for i in range(n)}) > 1


def percus_check(measure: DiscreteEvenMeasure, A_sets: Sequence, p: int, l: int, R: float, h: complex = 0.0, tol: float = 1e-10) -> PercusReport:
    """u_{k+2}(x_p, x_l, x^{A_1}, ..., x^{A_k}) = 0 under a product measure when |p - l| > k R.

    Sites are integers on a line. Sets with diameter above R void the claim
    (reported as not applicable). Independently of the distance condition,
    whenever the observables split into groups on disjoint sites the Ursell
    function must vanish as well.
    """
    sets = [_sites(A) for A in A_sets]
    k = len(sets)
    diam_ok = all((max(A) - min(A) if A else 0) <= R for A in sets)
    obs = [[p], [l]] + sets
    lo = min(min(o) for o in obs)
    hi = max(max(o) for o in obs)
    shifted = [[j - lo for j in o] for o in obs]
    spec = InteractionSpec(hi - lo + 1, (), measure)
    separated = abs(p - l) > k * R
    split = _independent_split(shifted)
    if not diam_ok:
        return PercusReport(False, True, None, separated, split, "some A_j has diameter > R; no claim")
    if not (separated or split):
        return PercusReport(False, True, None, separated, split, "|p - l| <= kR and no independent split; no claim")
    u = ursell(spec, shifted, h)
    return PercusReport(True, abs(u) <= tol, u, separated, split)


# ---------------------------------------------------------------------------
# two-point functions, transfer matrix, mass gap


def truncated_two_point(spec: InteractionSpec, k: int, l: int, h=None) -> complex:
    f = expectations(spec, h, [[k, l], [k], [l]])
    return complex(f[0] - f[1] * f[2])


def transfer_matrix_1d(J: complex, h: complex) -> tuple[complex, complex]:
    """Eigenvalues (larger modulus first) of the symmetric spin-1/2 transfer matrix."""
    J, h = complex(J), complex(h)
    a = np.exp(J) * np.cosh(h)
    d = np.sqrt(np.exp(2 * J) * np.sinh(h) ** 2 + np.exp(-2 * J))
    l1, l2 = a + d, a - d
    if abs(l2) > abs(l1):
        l1, l2 = l2, l1
    return complex(l1), complex(l2)


def transfer_matrix_ring(n: int, J: complex, h: complex) -> tuple[complex, np.ndarray]:
    """Exact <s_0> and <s_0 s_d> for d = 0..n-1 on a nearest-neighbour ring of n sites."""
    J, h = complex(J), complex(h)
    T = np.array(
        [[np.exp(J + h), np.exp(-J)], [np.exp(-J), np.exp(J - h)]],
        dtype=complex,
    )
    Sz = np.diag([1.0, -1.0]).astype(complex)
    powers = [np.eye(2, dtype=complex)]
    for _ in range(n):
        powers.append(powers[-1] @ T)
    Z = np.trace(powers[n])
    m = np.trace(Sz @ powers[n]) / Z
    two = np.array([np.trace(Sz @ powers[d] @ Sz @ powers[n - d]) / Z for d in range(n)])
    return complex(m), two


def _nn_ring_coupling(spec: InteractionSpec) -> complex | None:
    """The common J when spec is a spin-1/2 nearest-neighbour ring, else None."""
    g = spec.geometry
    if g is None or len(g.dims) != 1 or not g.periodic or not spec.measure.is_spin_half():
        return None
    n = spec.nsites
    want = {varset({i, (i + 1) % n}) for i in range(n)}
    got = dict(spec.couplings)
    if set(got) != want or n < 3:
        return None
    Js = set(got.values())
    return Js.pop() if len(Js) == 1 else None


@dataclass
class MassGapEstimate:
    m_fit: float
    m_oracle: float | None
    passed: bool
    distances: list[int] = field(default_factory=list)
    log_truncated: list[float] = field(default_factory=list)
    intercept: float = 0.0


def mass_gap_fit(spec: InteractionSpec, h, window: tuple[int, int] | None = None, oracle_tol: float = 1e-2) -> MassGapEstimate:
    """Decay rate of |<x_0 x_d> - <x_0><x_d>| by least squares of its log against d.

    The default window is d in [2, n/2 - 1]. Distances where the truncated
    value is under NOISE_FLOOR times the moment scale are dropped (the first
    two are always kept). For a spin-1/2 nearest-neighbour
    ring the transfer-matrix rate log|l1/l2| is attached as the oracle.
    """
    g = spec.geometry
    if g is None or len(g.dims) != 1:
        raise ValueError("mass_gap_fit needs a 1D geometry")
    n = spec.nsites
    lo, hi = window if window is not None else (2, n // 2 - 1)
    hi = min(hi, n // 2)
    ds = list(range(lo, hi + 1))
    if len(ds) < 2:
        raise WindowTooSmall(f"window {lo}..{hi} has fewer than two distances for {n} sites")
    obs = [[0]] + [[d] for d in ds] + [[0, d] for d in ds]
    f = expectations(spec, h, obs)
    m0 = f[0]
    singles = f[1 : 1 + len(ds)]
    pairs = f[1 + len(ds) :]
    trunc = np.abs(pairs - m0 * singles)
    J = _nn_ring_coupling(spec)
    oracle = None
    if J is not None and J != 0:
        l1, l2 = transfer_matrix_1d(J, complex(h))
        oracle = float(math.log(abs(l1) / abs(l2)))
    if all(J == 0 for _, J in spec.couplings) or np.all(trunc <= 1e-300):
        return MassGapEstimate(math.inf, math.inf if J == 0 else oracle, True, ds, [-math.inf] * len(ds))
    # below ~1e-12 of the moments the subtraction is mostly rounding
    keep = trunc > NOISE_FLOOR * max(1.0, float(np.abs(pairs).max()))
    keep[:2] = True
    ds = [d for d, k in zip(ds, keep) if k]
    logs = np.log(trunc[keep])
    slope, intercept = np.polyfit(np.array(ds, dtype=float), logs, 1)
    m_fit = float(-slope)
    ok = m_fit > 0 and (oracle is None or abs(m_fit - oracle) <= oracle_tol)
    return MassGapEstimate(m_fit, oracle, bool(ok), ds, [float(x) for x in logs], float(intercept))


# ---------------------------------------------------------------------------
# beta-derivatives of the truncated two-point function


def _series_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    c = np.zeros_like(a)
    for j in range(a.size):
        c[j] = (a[j] - np.dot(c[:j], b[j:0:-1])) / b[0]
    return c


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([np.dot(a[: j + 1], b[j::-1]) for j in range(a.size)])


def beta_series(spec: InteractionSpec, k: int, l: int, order: int, h=None) -> np.ndarray:
    """Derivatives d^j/dbeta^j at beta = 0, j = 0..order, of the truncated two-point function
    when every coupling J(A) is replaced by beta J(A).

    Taylor coefficients of the weighted sums are exact moments of the coupling
    energy at beta = 0; the ratio and product are then formed as power series.
    """
    hv = _fields(spec, h)
    blks = list(blocks(spec))
    shift = max(float((b.log_prior + b.spins @ hv).real.max()) for b in blks)
    K = order + 1
    M = np.zeros((4, K), dtype=complex)
    absz = 0.0
    for b in blks:
        w = np.exp(b.log_prior + b.spins @ hv - shift)
        absz += float(np.abs(w).sum())
        obs = np.stack([np.ones(w.size), b.spins[:, k], b.spins[:, l], b.spins[:, k] * b.spins[:, l]])
        Ej = np.ones(w.size, dtype=complex)
        for j in range(K):
            M[:, j] += obs @ (w * Ej) / math.factorial(j)
            Ej = Ej * b.coupling
    if abs(M[0, 0]) <= VANISH_REL * absz:
        raise VanishingPartition("free partition function vanishes at this field")
    mk = _series_div(M[1], M[0])
    ml = _series_div(M[2], M[0])
    mkl = _series_div(M[3], M[0])
    trunc = mkl - _series_mul(mk, ml)
    return np.array([trunc[j] * math.factorial(j) for j in range(K)])


@dataclass
class BetaReport:
    passed: bool
    derivatives: list[complex]
    distance: float
    Q: int
    R: float


def beta_derivative_vanishing(spec: InteractionSpec, k: int, l: int, Q: int, R: float | None = None, h=None, tol: float = 1e-10) -> BetaReport:
    """The first Q beta-derivatives (orders 0..Q-1) vanish when dist(k, l) > Q R."""
    if not 1 <= Q <= 4:
        raise ValueError("Q must be between 1 and 4")
    R = spec.interaction_range() if R is None else R
    dist = spec.distance(k, l)
    if not dist > Q * R:
        raise RangeViolation(f"distance {dist} is not larger than Q R = {Q * R}")
    d = beta_series(spec, k, l, Q - 1, h)
    return BetaReport(bool(np.all(np.abs(d) <= tol)), [complex(x) for x in d], dist, Q, R)
