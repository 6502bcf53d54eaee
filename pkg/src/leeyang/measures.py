"""Finitely supported even single-site measures.

A lattice-supported even measure has Laplace transform E(z) = sum_x w_x e^{zx}.
With every atom at an integer multiple k*delta of a grid step, the
substitution w = e^{delta z} turns E into w^{-M} Q(w) for a palindromic
polynomial Q of degree 2M, and E has no zero off the imaginary axis exactly
when every root of Q lies on the unit circle. That is how ``pn_check`` decides
the PN property.

Continuous measures are not supported.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .analysis import UniPoly, roots
from .errors import DegenerateMeasure, InvalidMeasure

GRID_TOL = 1e-9
MAX_HALF_DEGREE = 512


def _float_gcd(values, tol=GRID_TOL) -> float:
    g = 0.0
    for v in values:
        a, b = max(g, v), min(g, v)
        while b > tol:
            r = math.fmod(a, b)
            if r < tol or b - r < tol:
                r = 0.0
            a, b = b, r
        g = a
    return g


@dataclass(frozen=True)
class DiscreteEvenMeasure:
    """Even probability measure: atoms at +-x (x > 0) with weight w each, plus mass at 0.

    ``atoms`` lists only the positive half. ``step`` is the lattice spacing;
    when omitted it is inferred as the gcd of the positions.
    """

    atoms: tuple[tuple[float, float], ...]
    weight_at_zero: float = 0.0
    step: float | None = None
    _grid: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple(sorted((float(x), float(w)) for x, w in self.atoms))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weight_at_zero", float(self.weight_at_zero))
        if any(x <= 0 or w <= 0 for x, w in atoms):
            raise InvalidMeasure("atom positions and weights must be positive")
        if len({x for x, _ in atoms}) != len(atoms):
            raise InvalidMeasure("duplicate atom positions")
        if self.weight_at_zero < 0:
            raise InvalidMeasure("weight at zero must be nonnegative")
        total = 2 * sum(w for _, w in atoms) + self.weight_at_zero
        if abs(total - 1) > 1e-9:
            raise InvalidMeasure(f"weights sum to {total}, not 1")
        step = self.step
        if atoms:
            if step is None:
                step = _float_gcd([x for x, _ in atoms])
            if step <= 0:
                raise InvalidMeasure("grid step must be positive")
            grid = tuple(round(x / step) for x, _ in atoms)
            if any(abs(k * step - x) > GRID_TOL * max(1.0, x) or k <= 0 for k, (x, _) in zip(grid, atoms)):
                raise InvalidMeasure(f"atoms are not on a lattice of step {step}")
            if grid[-1] > MAX_HALF_DEGREE:
                raise InvalidMeasure(f"lattice too fine: {grid[-1]} steps to the outermost atom")
        else:
            step = 1.0 if step is None else step
            grid = ()
        object.__setattr__(self, "step", float(step))
        object.__setattr__(self, "_grid", grid)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def spin_half(cls) -> DiscreteEvenMeasure:
        """Ising spin: +-1 with probability 1/2 each."""
        return cls(((1.0, 0.5),), 0.0, 1.0)

    @classmethod
    def spin_s(cls, s: float) -> DiscreteEvenMeasure:
        """Equal weight on -S, -S+1, ..., S (physical spin values)."""
        two_s = Fraction(s).limit_denominator(2) * 2
        if two_s.denominator != 1 or two_s < 1:
            raise InvalidMeasure(f"spin must be a positive half-integer, got {s}")
        n = int(two_s) + 1
        pos = [(-float(two_s) / 2 + k) for k in range(n)]
        atoms = tuple((x, 1.0 / n) for x in pos if x > 0)
        zero = 1.0 / n if n % 2 else 0.0
        return cls(atoms, zero, 1.0 if n % 2 else 0.5)

    @classmethod
    def three_point(cls, lam: float) -> DiscreteEvenMeasure:
        """lam/2 at +-1 and 1 - lam at the origin."""
        if not 0 < lam <= 1:
            raise InvalidMeasure("three-point parameter must lie in (0, 1]")
        return cls(((1.0, lam / 2),), 1.0 - lam, 1.0)

    @classmethod
    def from_dict(cls, d: dict) -> DiscreteEvenMeasure:
        kind = d.get("type", "atoms")
        if kind == "spin_half":
            return cls.spin_half()
        if kind == "spin_s":
            return cls.spin_s(d["s"])
        if kind == "three_point":
            return cls.three_point(d["lambda"])
        if kind == "atoms":
            return cls(tuple((x, w) for x, w in d["atoms"]), d.get("zero_weight", 0.0), d.get("step"))
        raise InvalidMeasure(f"unknown measure type {kind!r}")

    @classmethod
    def from_json(cls, text: str) -> DiscreteEvenMeasure:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "type": "atoms",
            "atoms": [[x, w] for x, w in self.atoms],
            "zero_weight": self.weight_at_zero,
            "step": self.step,
        }

    # -- views ----------------------------------------------------------------

    def support(self) -> np.ndarray:
        """All support points in ascending order."""
        pos = [x for x, _ in self.atoms]
        pts = [-x for x in reversed(pos)] + ([0.0] if self.weight_at_zero > 0 else []) + pos
        return np.array(pts)

    def weights(self) -> np.ndarray:
        w = [w for _, w in self.atoms]
        ws = list(reversed(w)) + ([self.weight_at_zero] if self.weight_at_zero > 0 else []) + w
        return np.array(ws)

    @property
    def max_abs(self) -> float:
        """S such that the convex hull of the support is [-S, S]."""
        return self.atoms[-1][0] if self.atoms else 0.0

    @property
    def half_degree(self) -> int:
        return self._grid[-1] if self._grid else 0

    def is_spin_half(self) -> bool:
        return self.atoms == ((1.0, 0.5),) and self.weight_at_zero == 0

    def laplace(self, z: complex) -> complex:
        """E(z) = sum over atoms of w e^{z x}, by direct summation."""
        return complex(np.sum(self.weights() * np.exp(complex(z) * self.support())))


def laplace_poly(mu: DiscreteEvenMeasure) -> UniPoly:
    """Palindromic Q with E(z) = w^{-M} Q(w), w = e^{step z}."""
    M = mu.half_degree
    c = np.zeros(2 * M + 1)
    c[M] = mu.weight_at_zero
    for k, (_, w) in zip(mu._grid, mu.atoms):
        c[M + k] = w
        c[M - k] = w
    return UniPoly(c)


@dataclass
class PNVerdict:
    is_pn: bool
    witness: complex | float
    roots: np.ndarray = field(repr=False, default=None)
    max_circle_deviation: float = 0.0


def pn_check(mu: DiscreteEvenMeasure, tol: float = 1e-8) -> PNVerdict:
    """Decide the PN property from the root moduli of the palindromic polynomial.

    When the measure is PN the witness is the largest | |w| - 1 | over roots;
    otherwise it is a zero z of E(z) with Re z != 0 (the off-circle root of
    largest modulus, pulled back through z = log(w)/step).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    Q = laplace_poly(mu)
    if Q.degree < 1:
        raise DegenerateMeasure("measure concentrated at the origin has constant Laplace transform")
    w = roots(Q)
    dev = np.abs(np.abs(w) - 1)
    worst = float(dev.max())
    if worst <= tol:
        return PNVerdict(True, worst, w, worst)
    off = w[dev > tol]
    root = off[np.argmax(np.abs(off))]
    return PNVerdict(False, cmath.log(root) / mu.step, w, worst)


def site_moment(mu: DiscreteEvenMeasure, h: complex, power: int) -> complex:
    """sum_x x^power e^{h x} mu(x) over the full (mirrored) support."""
    if power < 0:
        raise ValueError("power must be nonnegative")
    x = mu.support()
    xp = np.ones_like(x) if power == 0 else x**power
    return complex(np.sum(mu.weights() * xp * np.exp(complex(h) * x)))


def L_constant(mu: DiscreteEvenMeasure) -> float:
    """Single-site mean in unit field: sum x e^x mu(x) / sum e^x mu(x)."""
    return (site_moment(mu, 1.0, 1) / site_moment(mu, 1.0, 0)).real


def three_point_threshold(tol: float = 1e-12, pn_tol: float = 1e-8) -> float:
    """Smallest lam in (0, 1] for which the three-point measure is PN, by bisection on pn_check."""
    lo, hi = 1e-6, 1.0
    if not pn_check(DiscreteEvenMeasure.three_point(hi), pn_tol).is_pn:
        raise RuntimeError("three-point measure with lam = 1 should be PN")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pn_check(DiscreteEvenMeasure.three_point(mid), pn_tol).is_pn:
            hi = mid
        else:
            lo = mid
    return hi
