"""One-variable polynomials, root finding and the complex-analysis toolkit.

Everything here works on plain ``complex`` / numpy values. The sampling
verifiers (``strong_gl_check``, ``disk_ratio_check``) are falsifiers: they try
hard to find a point where the claimed inequality fails and report the worst
value seen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NotHalfPlaneFree,
    NotInRightHalfPlane,
    OutsideDisk,
    PoleAtMinusOne,
    VanishingInDisk,
    ZeroPolynomial,
)

MAX_DEGREE = 64
NEWTON_STEPS = 5
HULL_TOL = 1e-9


class UniPoly:
    """Dense polynomial in one complex variable, coefficients in ascending degree.

    Trailing (high-degree) zeros are stripped so the leading coefficient is
    nonzero; the zero polynomial is stored as ``[0]`` with ``degree == -1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        c[np.abs(c) <= 1e-300] = 0
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self) -> int:
        if self.coeffs.size == 1 and self.coeffs[0] == 0:
            return -1
        return self.coeffs.size - 1

    def is_zero(self) -> bool:
        return self.degree < 0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z) + self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * z + c
        return acc if acc.ndim else complex(acc)

    def derivative(self) -> UniPoly:
        if self.coeffs.size == 1:
            return UniPoly([0])
        return UniPoly(self.coeffs[1:] * np.arange(1, self.coeffs.size))

    def abs_scale(self, z) -> np.ndarray | float:
        """Sum of |c_k| |z|^k, the natural size against which |p(z)| is judged."""
        r = np.abs(np.asarray(z, dtype=complex))
        acc = np.zeros_like(r) + abs(self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            acc = acc * r + abs(c)
        return acc if acc.ndim else float(acc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniPoly):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self) -> str:
        return f"UniPoly({self.coeffs.tolist()!r})"

    @classmethod
    def from_roots(cls, roots, leading: complex = 1.0) -> UniPoly:
        return cls(np.polynomial.polynomial.polyfromroots(roots) * leading)


def roots(p: UniPoly) -> np.ndarray:
    """All roots of ``p`` with multiplicity.

    Companion-matrix eigenvalues (numpy's scaled companion), then up to five
    Newton steps per root, each kept only if it lowers |p|. Clusters of nearby
    roots are then tested as a single multiple root (see ``_merge_clusters``).
    """
    if p.is_zero():
        raise ZeroPolynomial("the zero polynomial has no finite root set")
    if p.degree < 1:
        raise ValueError("roots() needs degree >= 1")
    if p.degree > MAX_DEGREE:
        raise ValueError(f"degree {p.degree} exceeds cap {MAX_DEGREE}")
    c = p.coeffs
    # exact zeros at the origin are peeled off so the companion matrix stays regular
    lead_zeros = int(np.flatnonzero(c)[0])
    core = c[lead_zeros:]
    found = np.zeros(lead_zeros, dtype=complex)
    if core.size > 1:
        z = np.polynomial.polynomial.polyroots(core).astype(complex)
        dp = p.derivative()
        for i in range(z.size):
            zi = z[i]
            val = abs(p(zi))
            for _ in range(NEWTON_STEPS):
                d = dp(zi)
                if d == 0 or val == 0:
                    break
                cand = zi - p(zi) / d
                cval = abs(p(cand))
                if not cval < val:
                    break
                zi, val = cand, cval
            z[i] = zi
        z = _merge_clusters(UniPoly(core), z)
        found = np.concatenate([found, z])
    return found


CLUSTER_RADIUS = 1e-2


def _backward_error(p: UniPoly, zs: np.ndarray) -> float:
    rebuilt = np.polynomial.polynomial.polyfromroots(zs) * p.coeffs[-1]
    return float(np.linalg.norm(rebuilt - p.coeffs) / np.linalg.norm(p.coeffs))


def _merge_clusters(p: UniPoly, zs: np.ndarray) -> np.ndarray:
    """Replace each cluster of m close roots by one m-fold root where that is consistent.

    An m-fold root comes out of the eigenvalue solver smeared over a circle of
    radius about eps^(1/m), while the cluster mean stays accurate. The mean is
    refined by Newton on the (m-1)-th derivative, for which it is a simple
    root, and the merge is kept only if the merged roots rebuild the
    coefficients to within the backward error of the unmerged ones.
    """
    n = zs.size
    if n < 2:
        return zs
    scale = max(1.0, float(np.abs(zs).max()))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(zs[i] - zs[j]) < CLUSTER_RADIUS * scale:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = zs.copy()
    base = _backward_error(p, zs)
    for idx in groups.values():
        m = len(idx)
        if m < 2:
            continue
        q = p
        for _ in range(m - 1):
            q = q.derivative()
        dq = q.derivative()
        c = complex(np.mean(zs[idx]))
        for _ in range(20):
            d = dq(c)
            if d == 0:
                break
            step = q(c) / d
            c -= step
            if abs(step) <= 1e-16 * max(1.0, abs(c)):
                break
        trial = out.copy()
        trial[idx] = c
        if _backward_error(p, trial) <= max(10 * base, 1e-14):
            out = trial
    return out


# ---------------------------------------------------------------------------
# convex hull in the plane (Andrew's monotone chain)


def convex_hull(points) -> list[tuple[float, float]]:
    """Counter-clockwise hull vertices of a finite point set, collinear points dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _segment_distance(p, a, b) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def hull_distance(point, hull) -> float:
    """Euclidean distance from ``point`` to the convex polygon ``hull`` (0 inside)."""
    if len(hull) == 1:
        return math.hypot(point[0] - hull[0][0], point[1] - hull[0][1])
    if len(hull) == 2:
        return _segment_distance(point, hull[0], hull[1])
    inside = True
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        if (b[0] - a[0]) * (point[1] - a[1]) - (b[1] - a[1]) * (point[0] - a[0]) < 0:
            inside = False
            break
    if inside:
        return 0.0
    return min(_segment_distance(point, hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull)))


# ---------------------------------------------------------------------------
# Gauss-Lucas


@dataclass
class GLWitness:
    critical_point: complex
    weights: np.ndarray | None
    hull_distance: float
    is_root: bool = False
    roots: np.ndarray = field(default=None, repr=False)

    @property
    def reconstruction_error(self) -> float:
        """|sum a_j z_j - w|; zero for critical points that are themselves roots."""
        if self.weights is None:
            return 0.0
        return float(abs(np.dot(self.weights, self.roots) - self.critical_point))


def gauss_lucas_check(p: UniPoly) -> list[GLWitness]:
    """Locate every critical point of ``p`` relative to the convex hull of its roots.

    For a critical point ``w`` that is not a root, the barycentric weights
    ``a_j = |w - z_j|^-2 / sum_k |w - z_k|^-2`` are returned; they reproduce
    ``w`` as a convex combination of the roots. Hull distances are measured
    after mapping the roots' bounding box to unit size.
    """
    if p.degree < 2:
        raise ValueError("gauss_lucas_check needs degree >= 2")
    zs = roots(p)
    crit = roots(p.derivative())
    lo = np.array([zs.real.min(), zs.imag.min()])
    hi = np.array([zs.real.max(), zs.imag.max()])
    size = float(max(hi - lo)) or 1.0
    center = (lo + hi) / 2

    def scaled(z):
        return ((z.real - center[0]) / size, (z.imag - center[1]) / size)

    hull = convex_hull([scaled(z) for z in zs])
    out = []
    for w in crit:
        resid = abs(p(w))
        if resid <= 1e-10 * p.abs_scale(w) or np.any(zs == w):
            out.append(GLWitness(complex(w), None, 0.0, is_root=True, roots=zs))
            continue
        inv = np.abs(w - zs) ** -2.0
        a = inv / inv.sum()
        out.append(GLWitness(complex(w), a, hull_distance(scaled(w), hull), roots=zs))
    return out


# ---------------------------------------------------------------------------
# sampling verifiers


@dataclass
class SamplingReport:
    name: str
    samples: int
    min_value: float
    max_value: float
    violations: int
    passed: bool
    extras: dict = field(default_factory=dict)


def _log_derivative(p: UniPoly, z: np.ndarray) -> np.ndarray:
    return p.derivative()(z) / p(z)


def strong_gl_check(p: UniPoly, samples: int = 2048, seed: int = 0) -> SamplingReport:
    """Sample the right half-plane and check Re(P'/P) > 0 there.

    Requires every root of ``p`` to satisfy Re <= 0 (a relative slack of 1e-9
    absorbs rounding of roots that sit on the imaginary axis).
    """
    if p.degree < 1:
        raise ValueError("strong_gl_check needs a non-constant polynomial")
    zs = roots(p)
    s = max(1.0, float(np.abs(zs).max()))
    if np.any(zs.real > 1e-9 * s):
        worst = zs[np.argmax(zs.real)]
        raise NotHalfPlaneFree(f"root {worst} has positive real part")
    rng = np.random.default_rng(seed)
    k = samples // 4
    parts = []
    # hugging the imaginary axis
    parts.append(10.0 ** rng.uniform(-6, -1, k) * s + 1j * rng.uniform(-2 * s, 2 * s, k))
    # next to the mirror images of the roots
    mirror = rng.choice(-np.conj(zs), k)
    eps = 10.0 ** rng.uniform(-6, 0, k) * s
    ang = rng.uniform(-np.pi / 2, np.pi / 2, k)
    parts.append(np.abs(mirror.real) + 1j * mirror.imag + eps * np.exp(1j * ang))
    # far field
    r = s * 10.0 ** rng.uniform(0, 4, k)
    th = rng.uniform(-1, 1, k) * (np.pi / 2) * (1 - 1e-6)
    parts.append(r * np.exp(1j * th))
    rest = samples - 3 * k
    parts.append(rng.uniform(0, 2 * s, rest) + 1j * rng.uniform(-2 * s, 2 * s, rest))
    z = np.concatenate(parts)
    z = z[z.real > 0]
    vals = _log_derivative(p, z).real
    bad = int(np.count_nonzero(~(vals > 0)))
    return SamplingReport("strong_gauss_lucas", int(z.size), float(vals.min()), float(vals.max()), bad, bad == 0)


def disk_ratio_check(A: complex, B: complex, R: float, samples: int = 2048, seed: int = 0) -> SamplingReport:
    """Check Re(z f'(z)/f(z)) < 0 on 0 < |z| < R for f(z) = A z + B / z.

    The hypothesis is that f has no zero in the punctured disk, i.e. A = 0 or
    |B/A| >= R^2. For A != 0 the sampled ratio is compared against the closed
    form (|z|^2 - |b|^2 |z|^-2) / |z + b/z|^2 with b = B/A.
    """
    A, B = complex(A), complex(B)
    if R <= 0:
        raise ValueError("R must be positive")
    if A == 0 and B == 0:
        raise VanishingInDisk("f is identically zero")
    if A != 0 and abs(B / A) < R * R:
        raise VanishingInDisk(f"f has zeros at |z| = {math.sqrt(abs(B / A)):.6g} < R = {R}")
    rng = np.random.default_rng(seed)
    half = samples // 2
    rad = np.concatenate([
        R * np.sqrt(rng.uniform(0, 1, half)),
        R * (1 - 10.0 ** rng.uniform(-9, -1, samples - half)),
    ])
    rad = rad[(rad > 0) & (rad < R)]
    z = rad * np.exp(1j * rng.uniform(0, 2 * np.pi, rad.size))
    ratio = ((A * z - B / z) / (A * z + B / z)).real
    extras = {}
    if A != 0:
        b = B / A
        closed = (np.abs(z) ** 2 - abs(b) ** 2 * np.abs(z) ** -2) / np.abs(z + b / z) ** 2
        extras["closed_form_max_dev"] = float(np.max(np.abs(closed - ratio) / np.maximum(1.0, np.abs(closed))))
    bad = int(np.count_nonzero(~(ratio < 0)))
    return SamplingReport("disk_ratio", int(z.size), float(ratio.min()), float(ratio.max()), bad, bad == 0, extras)


# ---------------------------------------------------------------------------
# conformal map and growth bounds


def cayley(h: complex) -> complex:
    """(1 - h)/(1 + h): right half-plane onto the unit disk, 1 -> 0."""
    h = complex(h)
    if h == -1:
        raise PoleAtMinusOne("cayley map has a pole at h = -1")
    return (1 - h) / (1 + h)


def alpha(h: complex) -> float:
    """Half-plane growth factor (|1+h| + |1-h|) / (|1+h| - |1-h|)."""
    h = complex(h)
    if not h.real > 0:
        raise NotInRightHalfPlane(f"alpha needs Re h > 0, got {h}")
    a, b = abs(1 + h), abs(1 - h)
    return (a + b) / (a - b)


def caratheodory_bound(f0: float, z: complex) -> float:
    """Upper bound f(0) (1+|z|)/(1-|z|) for |f(z)| when Re f > 0 on the disk."""
    r = abs(z)
    if not r < 1:
        raise OutsideDisk(f"|z| = {r} is not inside the unit disk")
    if not f0 > 0:
        raise ValueError("f0 must be positive")
    return f0 * (1 + r) / (1 - r)


def borel_caratheodory_bound(max_re: float, f0: complex, r: float) -> float:
    if not 0 < r < 1:
        raise ValueError("need 0 < r < 1")
    return 2 * r / (1 - r) * max_re + (1 + r) / (1 - r) * abs(f0)


def taylor_tail_bound(C: float, R: float, K: int, z: complex) -> float:
    """C (|z|/R)^K / (1 - |z|/R) for a function vanishing to order K at 0, |f| <= C on |z| < R."""
    if C < 0 or K < 0 or R <= 0:
        raise ValueError("need C >= 0, K >= 0, R > 0")
    t = abs(z) / R
    if not t < 1:
        raise OutsideDisk(f"|z| = {abs(z)} is not inside the disk of radius {R}")
    return C * t**K / (1 - t)
