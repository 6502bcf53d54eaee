"""Model specification, exact enumeration, and the fugacity polynomial.

Weight convention: a configuration x has weight

    prod_k mu(x_k) * exp( sum_A J(A) prod_{k in A} x_k + sum_k h_k x_k )

so a real positive field favors positive spins. Since the measure and the
interaction are even, flipping the sign of every field leaves Z unchanged.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass

import numpy as np

from .errors import EmptySupport, NoCouplings, NonSpinHalf, TooManySites, VanishingPartition
from .measures import DiscreteEvenMeasure
from .polycore import MultiAffinePoly, members, popcount, varset

MAX_ENUM_SITES = 20
MAX_CONFIGS = 1 << 22
BLOCK = 1 << 15
VANISH_REL = 1e-12


@dataclass(frozen=True)
class Geometry:
    """Row-major embedding of sites 0..N-1 into a box of ``dims``, optionally a torus."""

    dims: tuple[int, ...]
    periodic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError(f"bad geometry dims {self.dims}")

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def coords(self, i: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(i, self.dims))

    def index(self, coords) -> int:
        return int(np.ravel_multi_index(tuple(c % d for c, d in zip(coords, self.dims)), self.dims))

    def offset(self, i: int, j: int) -> tuple[int, ...]:
        """Coordinate difference j - i, minimal-image on a torus."""
        out = []
        for a, b, d in zip(self.coords(i), self.coords(j), self.dims):
            t = b - a
            if self.periodic:
                t = (t + d // 2) % d - d // 2
            out.append(t)
        return tuple(out)

    def distance(self, i: int, j: int) -> float:
        return math.sqrt(sum(t * t for t in self.offset(i, j)))

    def translate(self, bits: int, shift) -> int:
        return varset(self.index(tuple(c + s for c, s in zip(self.coords(i), shift))) for i in members(bits))


@dataclass(frozen=True)
class InteractionSpec:
    """Sites, multibody couplings {A: J(A)}, the common single-site measure, geometry.

    ``couplings`` is normalized to a tuple of ``(bitmask, complex J)`` sorted by
    bitmask with duplicate sets merged by summing J. ``field`` is the default
    uniform field used when none is supplied.
    """

    nsites: int
    couplings: tuple[tuple[int, complex], ...]
    measure: DiscreteEvenMeasure
    geometry: Geometry | None = None
    field: complex = 0j

    def __post_init__(self):
        if not 1 <= self.nsites <= 63:
            raise TooManySites(f"nsites={self.nsites} outside [1, 63]")
        merged: dict[int, complex] = {}
        for A, J in self.couplings:
            A = int(A) if not isinstance(A, (set, frozenset, list, tuple)) else varset(A)
            if bin(A).count("1") < 2:
                raise ValueError(f"coupling set {members(A)} has fewer than two sites")
            if A >> self.nsites:
                raise ValueError(f"coupling set {members(A)} is not inside the {self.nsites} sites")
            merged[A] = merged.get(A, 0j) + complex(J)
        object.__setattr__(self, "couplings", tuple(sorted(merged.items())))
        object.__setattr__(self, "field", complex(self.field))
        if self.geometry is not None and self.geometry.size != self.nsites:
            raise ValueError(f"geometry has {self.geometry.size} sites, spec has {self.nsites}")

    # -- properties -----------------------------------------------------------

    def is_ferromagnetic(self) -> bool:
        return all(J.imag == 0 and J.real >= 0 for _, J in self.couplings)

    def is_pair(self) -> bool:
        return all(bin(A).count("1") == 2 for A, _ in self.couplings)

    def total_coupling(self) -> complex:
        return sum((J for _, J in self.couplings), 0j)

    def distance(self, i: int, j: int) -> float:
        if self.geometry is not None:
            return self.geometry.distance(i, j)
        return float(abs(i - j))

    def diameter(self, bits: int) -> float:
        pts = members(bits)
        return max((self.distance(a, b) for a, b in itertools.combinations(pts, 2)), default=0.0)

    def interaction_range(self) -> float:
        return max((self.diameter(A) for A, _ in self.couplings), default=0.0)

    def scaled(self, beta: complex) -> InteractionSpec:
        return InteractionSpec(self.nsites, tuple((A, beta * J) for A, J in self.couplings), self.measure, self.geometry, self.field)

    def with_couplings(self, couplings) -> InteractionSpec:
        return InteractionSpec(self.nsites, tuple(couplings), self.measure, self.geometry, self.field)

    def permuted(self, perm) -> InteractionSpec:
        """Relabel site i as perm[i]; geometry is dropped."""
        return InteractionSpec(
            self.nsites,
            tuple((varset(perm[i] for i in members(A)), J) for A, J in self.couplings),
            self.measure,
            None,
            self.field,
        )

    # -- serialization --------------------------------------------------------

    @classmethod
    def from_dict(cls, d: dict) -> InteractionSpec:
        couplings = []
        for c in d.get("couplings", []):
            J = c["J"]
            J = complex(J[0], J[1]) if isinstance(J, (list, tuple)) else complex(J)
            couplings.append((varset(c["sites"]), J))
        meas = DiscreteEvenMeasure.from_dict(d.get("measure", {"type": "spin_half"}))
        geo = d.get("geometry")
        geometry = Geometry(tuple(geo["dims"]), bool(geo.get("periodic", True))) if geo else None
        f = d.get("field", 0)
        f = complex(f[0], f[1]) if isinstance(f, (list, tuple)) else complex(f)
        return cls(int(d["nsites"]), tuple(couplings), meas, geometry, f)

    @classmethod
    def from_json(cls, text: str) -> InteractionSpec:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        d = {
            "nsites": self.nsites,
            "couplings": [{"sites": members(A), "J": [J.real, J.imag]} for A, J in self.couplings],
            "measure": self.measure.to_dict(),
            "field": [self.field.real, self.field.imag],
        }
        if self.geometry is not None:
            d["geometry"] = {"dims": list(self.geometry.dims), "periodic": self.geometry.periodic}
        return d


# ---------------------------------------------------------------------------
# builders


def ring(n: int, J: complex, measure: DiscreteEvenMeasure | None = None, field: complex = 0j) -> InteractionSpec:
    """Nearest-neighbour ring of ``n`` sites (periodic 1D)."""
    measure = measure or DiscreteEvenMeasure.spin_half()
    bonds = {varset({i, (i + 1) % n}) for i in range(n)} if n > 1 else set()
    return InteractionSpec(n, tuple((b, J) for b in bonds), measure, Geometry((n,), True), field)


def chain(n: int, J: complex, measure: DiscreteEvenMeasure | None = None, field: complex = 0j) -> InteractionSpec:
    """Open nearest-neighbour chain."""
    measure = measure or DiscreteEvenMeasure.spin_half()
    return InteractionSpec(n, tuple((varset({i, i + 1}), J) for i in range(n - 1)), measure, Geometry((n,), False), field)


def torus(dims, J: complex, measure: DiscreteEvenMeasure | None = None, field: complex = 0j) -> InteractionSpec:
    """Nearest-neighbour hypercubic torus."""
    measure = measure or DiscreteEvenMeasure.spin_half()
    geo = Geometry(tuple(dims), True)
    bonds = set()
    for i in range(geo.size):
        c = geo.coords(i)
        for ax in range(len(c)):
            nb = list(c)
            nb[ax] += 1
            j = geo.index(nb)
            if j != i:
                bonds.add(varset({i, j}))
    return InteractionSpec(geo.size, tuple((b, J) for b in sorted(bonds)), measure, geo, field)


def random_spec(
    rng: np.random.Generator,
    nsites: int,
    edge_prob: float = 0.5,
    J_range: tuple[float, float] = (0.0, 1.0),
    triple_prob: float = 0.0,
    measure: DiscreteEvenMeasure | None = None,
) -> InteractionSpec:
    """Random ferromagnetic graph: each pair present with ``edge_prob``, each triple with ``triple_prob``."""
    measure = measure or DiscreteEvenMeasure.spin_half()
    couplings = []
    for a, b in itertools.combinations(range(nsites), 2):
        if rng.random() < edge_prob:
            couplings.append((varset((a, b)), rng.uniform(*J_range)))
    if triple_prob > 0:
        for t in itertools.combinations(range(nsites), 3):
            if rng.random() < triple_prob:
                couplings.append((varset(t), rng.uniform(*J_range)))
    if not couplings and nsites >= 2:
        couplings.append((varset((0, 1)), rng.uniform(*J_range)))
    return InteractionSpec(nsites, tuple(couplings), measure)


# ---------------------------------------------------------------------------
# translation structure


def canonical_class(geometry: Geometry, bits: int) -> int:
    """Minimal bitmask over all translates of ``bits`` on the torus."""
    best = bits
    for shift in itertools.product(*(range(d) for d in geometry.dims)):
        best = min(best, geometry.translate(bits, shift))
    return best


def translation_classes(spec: InteractionSpec) -> dict[int, list[int]]:
    if spec.geometry is None or not spec.geometry.periodic:
        raise ValueError("translation classes need a periodic geometry")
    out: dict[int, list[int]] = {}
    for A, _ in spec.couplings:
        out.setdefault(canonical_class(spec.geometry, A), []).append(A)
    return out


def periodic_resize(spec: InteractionSpec, dims) -> InteractionSpec:
    """Same translation-invariant interaction on a torus of different size.

    Each coupling class is re-instantiated from its shape (offsets from its
    first site) at every translate of the new torus.
    """
    geo = spec.geometry
    if geo is None or not geo.periodic:
        raise ValueError("periodic_resize needs a periodic geometry")
    new = Geometry(tuple(dims), True)
    if len(new.dims) != len(geo.dims):
        raise ValueError("dimension mismatch")
    shapes: dict[tuple, complex] = {}
    for rep, sets in translation_classes(spec).items():
        A = sets[0]
        J = dict(spec.couplings)[A]
        pts = members(A)
        shape = tuple(sorted(geo.offset(pts[0], p) for p in pts))
        shapes[shape] = J
    couplings: dict[int, complex] = {}
    for i in range(new.size):
        c = new.coords(i)
        for shape, J in shapes.items():
            B = varset(new.index(tuple(a + b for a, b in zip(c, off))) for off in shape)
            if bin(B).count("1") == len(shape):
                couplings[B] = J
    return InteractionSpec(new.size, tuple(couplings.items()), spec.measure, new, spec.field)


# ---------------------------------------------------------------------------
# enumeration


@dataclass
class Block:
    spins: np.ndarray  # (b, n)
    log_prior: np.ndarray  # (b,)
    coupling: np.ndarray  # (b,) complex, sum_A J(A) x^A


def _check_enumerable(spec: InteractionSpec) -> int:
    if spec.nsites > MAX_ENUM_SITES:
        raise TooManySites(f"{spec.nsites} sites exceeds the enumeration cap of {MAX_ENUM_SITES}")
    m = spec.measure.support().size
    if m == 0:
        raise EmptySupport("measure has empty support")
    N = m**spec.nsites
    if N > MAX_CONFIGS:
        raise TooManySites(f"{N} configurations exceeds the cap of {MAX_CONFIGS}")
    return N


def _make_blocks(spec: InteractionSpec) -> Iterator[Block]:
    N = _check_enumerable(spec)
    n = spec.nsites
    vals = spec.measure.support()
    logw = np.log(spec.measure.weights())
    m = vals.size
    radix = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, N, BLOCK):
        ids = np.arange(start, min(N, start + BLOCK), dtype=np.int64)
        digits = (ids[:, None] // radix[None, :]) % m
        spins = vals[digits]
        log_prior = logw[digits].sum(axis=1)
        coupling = np.zeros(ids.size, dtype=complex)
        for A, J in spec.couplings:
            coupling += J * np.prod(spins[:, members(A)], axis=1)
        yield Block(spins, log_prior, coupling)


@functools.lru_cache(maxsize=16)
def _cached_blocks(spec: InteractionSpec) -> tuple[Block, ...]:
    return tuple(_make_blocks(spec))


def blocks(spec: InteractionSpec) -> Iterable[Block]:
    """Configuration blocks in lexicographic order (site 0 most significant)."""
    N = _check_enumerable(spec)
    if N * spec.nsites <= 1 << 21:
        return _cached_blocks(spec)
    return _make_blocks(spec)


def _fields(spec: InteractionSpec, fields) -> np.ndarray:
    if fields is None:
        fields = spec.field
    f = np.asarray(fields, dtype=complex)
    if f.ndim == 0:
        f = np.full(spec.nsites, complex(f))
    if f.shape != (spec.nsites,):
        raise ValueError(f"fields must be scalar or length {spec.nsites}")
    return f


def weighted_sums(spec: InteractionSpec, fields=None, observables: Iterable[Iterable[int]] = ()):
    """Streamed sums over configurations.

    Returns ``(log_shift, Z, sums, abs_total)`` where the true values are
    ``exp(log_shift)`` times ``Z`` (partition function), ``sums[i]`` (sum of
    weight times the product of spins listed in ``observables[i]``, repeats
    allowed) and ``abs_total`` (sum of |weight|).
    """
    h = _fields(spec, fields)
    obs = [list(o) for o in observables]
    shift = -np.inf
    Z = 0j
    sums = np.zeros(len(obs), dtype=complex)
    absz = 0.0
    for blk in blocks(spec):
        expo = blk.log_prior + blk.coupling + blk.spins @ h
        top = float(expo.real.max())
        if top > shift:
            if np.isfinite(shift):
                r = math.exp(shift - top)
                Z *= r
                sums *= r
                absz *= r
            shift = top
        w = np.exp(expo - shift)
        Z += w.sum()
        absz += float(np.abs(w).sum())
        for i, o in enumerate(obs):
            prod = np.prod(blk.spins[:, o], axis=1) if o else 1.0
            sums[i] += np.sum(w * prod)
    return shift, Z, sums, absz


def partition_function(spec: InteractionSpec, fields=None) -> complex:
    """Z by enumeration of every configuration."""
    shift, Z, _, _ = weighted_sums(spec, fields)
    return complex(Z * np.exp(shift))


def expectations(spec: InteractionSpec, fields=None, observables: Iterable[Iterable[int]] = ()) -> np.ndarray:
    """<prod_{k in O} x_k> for each observable O; raises VanishingPartition when Z is numerically 0."""
    _, Z, sums, absz = weighted_sums(spec, fields, observables)
    if abs(Z) <= VANISH_REL * absz:
        raise VanishingPartition(f"|Z| = {abs(Z):.3e} relative to {absz:.3e}")
    return sums / Z


def free_partition(spec: InteractionSpec, fields=None) -> complex:
    """prod_k E(h_k), the value of Z with every coupling switched off."""
    return complex(np.prod([spec.measure.laplace(hk) for hk in _fields(spec, fields)]))


# ---------------------------------------------------------------------------
# fugacity polynomial


def _require_spin_half(spec: InteractionSpec):
    if not spec.measure.is_spin_half():
        raise NonSpinHalf("fugacity polynomials are defined for the +-1 Ising measure only")
    if spec.nsites > MAX_ENUM_SITES:
        raise TooManySites(f"{spec.nsites} sites exceeds the cap of {MAX_ENUM_SITES}")


def fugacity_poly(spec: InteractionSpec) -> MultiAffinePoly:
    """Multiaffine polynomial in z_j = e^{-2 h_j} whose z^A coefficient is the Gibbs factor of down-set A.

    p(A) = prod over couplings B with |A cap B| odd of e^{-2 J(B)}, so that
    Z(h) = 2^-n exp(sum h + sum J) * P(e^{-2h}).
    """
    _require_spin_half(spec)
    n = spec.nsites
    keys = np.arange(1 << n, dtype=np.uint64)
    coef = np.ones(keys.size, dtype=complex)
    for B, J in spec.couplings:
        odd = (popcount(keys & np.uint64(B)) & 1).astype(bool)
        coef = np.where(odd, coef * np.exp(-2 * J), coef)
    return MultiAffinePoly(n, keys=keys, values=coef)


def fugacity_prefactor(spec: InteractionSpec, fields) -> complex:
    """The factor 2^-n exp(sum h + sum J) linking P(e^{-2h}) to Z(h)."""
    h = _fields(spec, fields)
    return complex(np.exp(h.sum() + spec.total_coupling()) / 2**spec.nsites)


def r_a_factor(A: int, J: complex, nvars: int | None = None) -> MultiAffinePoly:
    """Single-coupling polynomial: even subsets of A with coefficient 1, odd ones with e^{-2J}."""
    sites = members(A)
    if len(sites) < 2:
        raise ValueError("r_a_factor needs |A| >= 2")
    nvars = max(sites) + 1 if nvars is None else nvars
    odd_c = np.exp(-2 * complex(J))
    coeffs = {}
    for r in range(len(sites) + 1):
        for sub in itertools.combinations(sites, r):
            coeffs[varset(sub)] = odd_c if r % 2 else 1.0
    return MultiAffinePoly(nvars, coeffs)


# ---------------------------------------------------------------------------
# family constants


@dataclass(frozen=True)
class FamilyStats:
    q: int
    v: int | None
    I0: float
    R0: float


def coupling_bounds(spec: InteractionSpec, J0=None) -> list[float]:
    """Per-coupling bound J0(A) >= 0, aligned with ``spec.couplings``.

    ``J0`` may be None (use |J(A)|), a number (uniform), a callable of the
    bitmask, or a mapping keyed by bitmask or by translation-class
    representative.
    """
    out = []
    for A, J in spec.couplings:
        if J0 is None:
            b = abs(J)
        elif isinstance(J0, (int, float)):
            b = float(J0)
        elif isinstance(J0, Mapping):
            if A in J0:
                b = J0[A]
            elif spec.geometry is not None and spec.geometry.periodic and canonical_class(spec.geometry, A) in J0:
                b = J0[canonical_class(spec.geometry, A)]
            else:
                b = abs(J)
        elif isinstance(J0, Callable):
            b = J0(A)
        else:
            raise TypeError(f"unsupported J0 of type {type(J0).__name__}")
        if b < 0:
            raise ValueError("coupling bounds must be nonnegative")
        out.append(float(b))
    return out


def family_stats(spec: InteractionSpec, J0=None) -> FamilyStats:
    """q (max couplings through a site), v (translation classes), I0 and R0 = 1/(q I0)."""
    if not spec.couplings:
        raise NoCouplings("family constants need at least one coupling")
    counts = [0] * spec.nsites
    for A, _ in spec.couplings:
        for s in members(A):
            counts[s] += 1
    q = max(counts)
    bounds = coupling_bounds(spec, J0)
    I0 = max(2.0 ** bin(A).count("1") * math.exp(2 * b) for (A, _), b in zip(spec.couplings, bounds))
    v = None
    if spec.geometry is not None and spec.geometry.periodic:
        v = len(translation_classes(spec))
    return FamilyStats(q, v, I0, 1.0 / (q * I0))
