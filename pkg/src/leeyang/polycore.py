"""Multiaffine polynomials with subset-indexed complex coefficients.

A monomial ``z^X = prod_{x in X} z_x`` is keyed by the bitmask of ``X``. The
polynomial keeps two parallel numpy arrays, keys (uint64, strictly ascending)
and coefficients (complex128, never exactly zero), so the canonical form is
unique and equality is array equality.

Asano contraction of two variables drops every monomial that contains exactly
one of them and merges the pair in the monomials that contain both.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence

import numpy as np

from .analysis import UniPoly
from .errors import LengthMismatch, OverlappingSupport, SameVariable, TooManyVariables

MAX_VARS = 63
PRUNE = 1e-300

VarSet = int


def varset(sites: Iterable[int]) -> VarSet:
    bits = 0
    for s in sites:
        if not 0 <= s < MAX_VARS:
            raise TooManyVariables(f"variable index {s} outside [0, {MAX_VARS})")
        bits |= 1 << int(s)
    return bits


def members(bits: VarSet) -> list[int]:
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return out


def popcount(keys: np.ndarray) -> np.ndarray:
    return np.bitwise_count(keys.astype(np.uint64)).astype(np.int64)


class MultiAffinePoly:
    """Polynomial of degree <= 1 in each of ``nvars`` complex variables.

    Construct from a mapping ``{bitmask: coefficient}`` or from the parallel
    arrays. Instances are immutable.
    """

    __slots__ = ("nvars", "keys", "values")

    def __init__(self, nvars: int, coeffs: Mapping[int, complex] | None = None, *, keys=None, values=None):
        if not 0 <= nvars <= MAX_VARS:
            raise TooManyVariables(f"nvars={nvars} exceeds the {MAX_VARS}-variable cap")
        if coeffs is not None:
            keys = np.fromiter((int(k) for k in coeffs), dtype=np.uint64, count=len(coeffs))
            values = np.fromiter((complex(v) for v in coeffs.values()), dtype=complex, count=len(coeffs))
        elif keys is None:
            keys = np.zeros(0, dtype=np.uint64)
            values = np.zeros(0, dtype=complex)
        keys = np.asarray(keys, dtype=np.uint64)
        values = np.asarray(values, dtype=complex)
        if keys.size and nvars < 64 and int(keys.max()) >> nvars:
            raise TooManyVariables(f"a key uses a variable index >= nvars={nvars}")
        # merge duplicates, order ascending, prune
        uk, inv = np.unique(keys, return_inverse=True)
        if uk.size != keys.size:
            re = np.bincount(inv, weights=values.real, minlength=uk.size)
            im = np.bincount(inv, weights=values.imag, minlength=uk.size)
            keys, values = uk, re + 1j * im
        else:
            order = np.argsort(keys, kind="stable")
            keys, values = keys[order], values[order]
        keep = np.abs(values) > PRUNE
        keys, values = keys[keep], values[keep]
        keys.setflags(write=False)
        values.setflags(write=False)
        self.nvars = int(nvars)
        self.keys = keys
        self.values = values

    # -- construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, c: complex = 1.0) -> MultiAffinePoly:
        return cls(nvars, {0: c})

    @classmethod
    def variable(cls, nvars: int, j: int, c: complex = 1.0) -> MultiAffinePoly:
        return cls(nvars, {1 << j: c})

    @classmethod
    def dense(cls, nvars: int, table: Sequence[complex]) -> MultiAffinePoly:
        """From a length-2^k coefficient table indexed by bitmask (k <= nvars)."""
        table = np.asarray(table, dtype=complex)
        return cls(nvars, keys=np.arange(table.size, dtype=np.uint64), values=table)

    @property
    def coeffs(self) -> dict[int, complex]:
        return {int(k): complex(v) for k, v in zip(self.keys, self.values)}

    def coeff(self, bits: VarSet) -> complex:
        i = np.searchsorted(self.keys, np.uint64(bits))
        if i < self.keys.size and int(self.keys[i]) == bits:
            return complex(self.values[i])
        return 0j

    def support(self) -> VarSet:
        """Bitmask of variables appearing in some monomial."""
        return int(np.bitwise_or.reduce(self.keys)) if self.keys.size else 0

    def __len__(self) -> int:
        return int(self.keys.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiAffinePoly):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and np.array_equal(self.keys, other.keys)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.nvars, self.keys.tobytes(), self.values.tobytes()))

    def __repr__(self) -> str:
        terms = ", ".join(f"{members(int(k))}: {complex(v):.6g}" for k, v in zip(self.keys[:8], self.values[:8]))
        more = " ..." if self.keys.size > 8 else ""
        return f"MultiAffinePoly(nvars={self.nvars}, {{{terms}{more}}})"

    def max_coeff_diff(self, other: MultiAffinePoly) -> float:
        """Largest |c_X - d_X| over the union of both supports."""
        keys = np.union1d(self.keys, other.keys)
        a = np.zeros(keys.size, dtype=complex)
        b = np.zeros(keys.size, dtype=complex)
        a[np.searchsorted(keys, self.keys)] = self.values
        b[np.searchsorted(keys, other.keys)] = other.values
        return float(np.max(np.abs(a - b))) if keys.size else 0.0

    def __mul__(self, other):
        if isinstance(other, MultiAffinePoly):
            return ma_mul(self, other)
        return MultiAffinePoly(self.nvars, keys=self.keys, values=self.values * complex(other))

    __rmul__ = __mul__

    def __call__(self, assignment) -> complex:
        return ma_eval(self, assignment)


def ma_mul(p: MultiAffinePoly, q: MultiAffinePoly) -> MultiAffinePoly:
    """Product of two multiaffine polynomials whose monomials never share a variable."""
    if p.nvars != q.nvars:
        raise LengthMismatch(f"nvars differ: {p.nvars} vs {q.nvars}")
    if not len(p) or not len(q):
        return MultiAffinePoly(p.nvars)
    clash = (p.keys[:, None] & q.keys[None, :]) != 0
    if clash.any():
        i, j = np.argwhere(clash)[0]
        raise OverlappingSupport(
            f"monomials {members(int(p.keys[i]))} and {members(int(q.keys[j]))} share variables"
        )
    keys = (p.keys[:, None] | q.keys[None, :]).ravel()
    values = (p.values[:, None] * q.values[None, :]).ravel()
    return MultiAffinePoly(p.nvars, keys=keys, values=values)


def ma_contract(p: MultiAffinePoly, x: int, y: int) -> MultiAffinePoly:
    """Asano-contract variable ``y`` into ``x``.

    Monomials with exactly one of z_x, z_y are dropped; z_x z_y becomes z_x;
    monomials with neither are kept. Afterwards ``y`` does not occur.
    """
    if x == y:
        raise SameVariable(f"cannot contract variable {x} with itself")
    for v in (x, y):
        if not 0 <= v < p.nvars:
            raise IndexError(f"variable {v} out of range for nvars={p.nvars}")
    bx, by = np.uint64(1 << x), np.uint64(1 << y)
    hx = (p.keys & bx) != 0
    hy = (p.keys & by) != 0
    keep = hx == hy
    keys = p.keys[keep] & ~by
    return MultiAffinePoly(p.nvars, keys=keys, values=p.values[keep])


def monomials(keys: np.ndarray, z: np.ndarray, nvars: int) -> np.ndarray:
    """Values z^X for each key X."""
    out = np.ones(keys.size, dtype=complex)
    for v in range(nvars):
        hit = (keys >> np.uint64(v)) & np.uint64(1)
        if hit.any():
            out = np.where(hit.astype(bool), out * z[v], out)
    return out


def ma_eval(p: MultiAffinePoly, assignment) -> complex:
    """Evaluate at a point, summing terms in ascending key order."""
    z = np.asarray(assignment, dtype=complex).ravel()
    if z.size != p.nvars:
        raise LengthMismatch(f"assignment has {z.size} entries, polynomial has {p.nvars} variables")
    if not len(p):
        return 0j
    terms = p.values * monomials(p.keys, z, p.nvars)
    total = 0j
    for t in terms:
        total += t
    return total


def ma_eval_many(p: MultiAffinePoly, points) -> np.ndarray:
    """Evaluate at each row of ``points`` (shape (m, nvars))."""
    pts = np.asarray(points, dtype=complex)
    if pts.ndim != 2 or pts.shape[1] != p.nvars:
        raise LengthMismatch(f"points must have shape (m, {p.nvars})")
    if not len(p):
        return np.zeros(pts.shape[0], dtype=complex)
    bits = ((p.keys[:, None] >> np.arange(p.nvars, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(bool)
    out = np.empty(pts.shape[0], dtype=complex)
    for i, row in enumerate(pts):
        mono = np.prod(np.where(bits, row[None, :], 1.0), axis=1)
        out[i] = np.sum(p.values * mono)
    return out


def ma_diagonal(p: MultiAffinePoly) -> UniPoly:
    """Set every variable equal: coefficient of z^k is the sum of c_X over |X| = k."""
    if not len(p):
        return UniPoly([0])
    deg = popcount(p.keys)
    re = np.bincount(deg, weights=p.values.real, minlength=p.nvars + 1)
    im = np.bincount(deg, weights=p.values.imag, minlength=p.nvars + 1)
    return UniPoly(re + 1j * im)


def ma_partial(p: MultiAffinePoly, j: int) -> MultiAffinePoly:
    if not 0 <= j < p.nvars:
        raise IndexError(f"variable {j} out of range for nvars={p.nvars}")
    bj = np.uint64(1 << j)
    hit = (p.keys & bj) != 0
    return MultiAffinePoly(p.nvars, keys=p.keys[hit] & ~bj, values=p.values[hit])


def ma_relabel(p: MultiAffinePoly, mapping: Mapping[int, int], nvars: int | None = None) -> MultiAffinePoly:
    """Rename variables (``mapping`` must be injective on the support)."""
    nvars = p.nvars if nvars is None else nvars
    new = np.zeros(p.keys.size, dtype=np.uint64)
    for v in members(p.support()):
        w = mapping.get(v, v)
        hit = (p.keys >> np.uint64(v)) & np.uint64(1)
        new |= hit << np.uint64(w)
    return MultiAffinePoly(nvars, keys=new, values=p.values)
