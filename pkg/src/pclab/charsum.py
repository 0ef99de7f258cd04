"""Exact multiplicative character sums and the bounds they are checked against.

A character sum is kept as a multiplicity vector over exponents mod the
period of the character (values exp(2*pi*i*r/period)); floats only appear
when a magnitude is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cayley import ConnectionSet
from .errors import DegreeMismatch, Empty, HypothesisViolated, TrivialCharacter
from .ff import FieldTower, MultChar

SLACK = 1e-9
GRAZE = 1e-6


@dataclass(frozen=True)
class RootOfUnitySum:
    multiplicities: np.ndarray
    zero_count: int

    @property
    def period(self) -> int:
        return self.multiplicities.size

    @property
    def count(self) -> int:
        return int(self.multiplicities.sum()) + self.zero_count

    def value(self) -> complex:
        r = np.flatnonzero(self.multiplicities)
        w = self.multiplicities[r]
        ang = 2 * np.pi * r / self.period
        return complex(np.sum(w * np.cos(ang)), np.sum(w * np.sin(ang)))

    def magnitude(self) -> float:
        return abs(self.value())


def char_sum(A, chi: MultChar) -> RootOfUnitySum:
    A = np.asarray(list(A) if not isinstance(A, np.ndarray) else A, dtype=np.int64)
    e = chi.values(A)
    zero = int(np.count_nonzero(e < 0))
    mult = np.bincount(e[e >= 0], minlength=chi.period).astype(np.int64)
    out = RootOfUnitySum(mult, zero)
    if out.count != A.size:
        raise AssertionError("character sum lost summands")
    return out


def sum_magnitudes(A, ms, tower: FieldTower) -> np.ndarray:
    """|sum_{a in A} chi_m(a)| for many characters at once (zero contributes nothing)."""
    A = np.asarray(A, dtype=np.int64)
    t = tower.log[A[A != 0]]
    ms = np.asarray(ms, dtype=np.int64)
    out = np.empty(ms.size)
    chunk = max(1, 2_000_000 // max(1, t.size))
    for s in range(0, ms.size, chunk):
        e = (ms[s:s + chunk, None] * t[None, :]) % tower.qm1
        ang = 2 * np.pi * e / tower.qm1
        out[s:s + chunk] = np.hypot(np.cos(ang).sum(axis=1), np.sin(ang).sum(axis=1))
    return out


@dataclass(frozen=True)
class BoundVerdict:
    """``magnitude`` against ``bound``; strict bounds get SLACK on the permissive side."""

    magnitude: float
    bound: float
    strict: bool
    hypothesis: bool = True

    @property
    def holds(self) -> bool:
        if not self.hypothesis:
            return True
        if self.strict:
            return self.magnitude < self.bound + SLACK
        return self.magnitude <= self.bound + SLACK

    @property
    def margin(self) -> float:
        return self.bound - self.magnitude

    @property
    def grazing(self) -> bool:
        return abs(self.margin) < GRAZE


def _require_nontrivial(chi: MultChar):
    if chi.is_trivial:
        raise TrivialCharacter("the bound needs a non-trivial character")


def katz_bound(tower: FieldTower) -> float:
    return (tower.N - 1) * math.sqrt(tower.q)


def verify_katz(tower: FieldTower, chi: MultChar, theta: int) -> BoundVerdict:
    """|sum_{a in F_q} chi(theta + a)| <= (N-1) sqrt(q) for theta of full degree N."""
    _require_nontrivial(chi)
    if tower.element_degree(theta) != tower.N:
        raise DegreeMismatch(f"theta has degree {tower.element_degree(theta)}, need {tower.N}")
    A = tower.add(int(theta), tower.base_field())
    return BoundVerdict(char_sum(A, chi).magnitude(), katz_bound(tower), strict=False)


@dataclass(frozen=True)
class AffineSpace:
    """u + span_{F_q}(basis) inside the top field of ``tower``."""

    tower: FieldTower
    u: int
    basis: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def linear_part(self) -> np.ndarray:
        return span(self.tower, self.basis)

    def elements(self) -> np.ndarray:
        return np.unique(self.tower.add(int(self.u), self.linear_part()))


def span(tower: FieldTower, basis) -> np.ndarray:
    """Sorted codes of the F_q-span of ``basis``; raises if the basis is dependent."""
    base = tower.base_field()
    V = np.array([0], dtype=np.int64)
    for b in basis:
        V = tower.add(V[:, None], tower.scale(int(b), base)[None, :]).ravel()
    V = np.unique(V)
    if V.size != tower.q ** len(basis):
        raise ValueError("basis vectors are linearly dependent over F_q")
    return V


def reis_hypothesis(A: AffineSpace) -> bool:
    """Some nonzero y in V makes A*y^-1 contain an element of degree N."""
    tower = A.tower
    deg = tower.degrees()
    elems = A.elements()
    for y in A.linear_part():
        if y == 0:
            continue
        if np.any(deg[tower.div(elems, np.full(elems.shape, y))] == tower.N):
            return True
    return False


def verify_reis(A: AffineSpace, chi: MultChar) -> BoundVerdict:
    """|sum_{a in A} chi(a)| < N q^(t - 1/2) whenever the degree hypothesis holds."""
    _require_nontrivial(chi)
    tower = A.tower
    bound = tower.N * tower.q ** (A.dim - 0.5)
    mag = char_sum(A.elements(), chi).magnitude()
    return BoundVerdict(mag, bound, strict=True, hypothesis=reis_hypothesis(A))


def verify_charsumcor(tower: FieldTower, basis, chi: MultChar) -> BoundVerdict:
    """|sum_{x in V} chi(x)| < (2n/sqrt(q))|V| for an n-dim V ∋ 1 in F_{q^{2n}}, V != F_{q^n}."""
    _require_nontrivial(chi)
    if tower.N % 2 or tower.N < 4:
        raise HypothesisViolated("needs a tower F_q ⊂ F_{q^{2n}} with n >= 2")
    n = tower.N // 2
    V = span(tower, basis)
    if len(basis) != n:
        raise HypothesisViolated(f"V has dimension {len(basis)}, need {n}")
    if 1 not in V:
        raise HypothesisViolated("1 is not in V")
    if np.array_equal(V, tower.subfield(n)):
        raise HypothesisViolated("V is the subfield F_{q^n}")
    bound = 2 * n / math.sqrt(tower.q) * V.size
    return BoundVerdict(char_sum(V, chi).magnitude(), bound, strict=True)


def verify_prime_cor(tower: FieldTower, basis, chi: MultChar) -> BoundVerdict:
    """|sum_{v in V} chi(v)| < |V| - 1 for a 2-dim V ∋ 1 in F_{q^n}, n an odd prime, q > n^2."""
    from .ff import is_prime

    _require_nontrivial(chi)
    n = tower.N
    if not (is_prime(n) and n % 2 == 1):
        raise HypothesisViolated(f"n = {n} is not an odd prime")
    if tower.q <= n * n:
        raise HypothesisViolated(f"q = {tower.q} is not larger than n^2 = {n * n}")
    if len(basis) != 2:
        raise HypothesisViolated("V must be 2-dimensional")
    V = span(tower, basis)
    if 1 not in V:
        raise HypothesisViolated("1 is not in V")
    return BoundVerdict(char_sum(V, chi).magnitude(), V.size - 1, strict=True)


def planes_through_one(tower: FieldTower, exclude_subfield: bool = True) -> list[tuple[int, int]]:
    """One basis (1, h) per 2-dim F_q-subspace containing 1, h the least-dlog choice."""
    seen = np.zeros(tower.order, dtype=bool)
    seen[tower.base_field()] = True
    out = []
    sub2 = tower.subfield(2) if tower.N % 2 == 0 else None
    for t in range(tower.qm1):
        h = tower.power(t)
        if seen[h]:
            continue
        V = span(tower, (1, h))
        seen[V] = True
        if exclude_subfield and sub2 is not None and np.array_equal(V, sub2):
            continue
        out.append((1, h))
    return out


# -- epsilon lower bounds ------------------------------------------------

@dataclass(frozen=True)
class EpsilonBound:
    epsilon_star: float

    def is_lower_bounded(self, eps: float) -> bool:
        return 0 < eps <= self.epsilon_star + SLACK


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list[tuple[float, float]]:
    """Andrew's monotone chain; counter-clockwise, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for pt in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], pt) <= 1e-12:
            lower.pop()
        lower.append(pt)
    for pt in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], pt) <= 1e-12:
            upper.pop()
        upper.append(pt)
    return lower[:-1] + upper[:-1]


def _segment_distance(a, b) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    L = dx * dx + dy * dy
    if L == 0:
        return math.hypot(ax, ay)
    s = min(1.0, max(0.0, -(ax * dx + ay * dy) / L))
    return math.hypot(ax + s * dx, ay + s * dy)


def epsilon_star(M) -> EpsilonBound:
    """Distance from the origin to the convex hull of the complex numbers in M."""
    pts = [(round(z.real, 15), round(z.imag, 15)) for z in (complex(m) for m in M)]
    if not pts:
        raise Empty("epsilon_star of an empty set")
    hull = convex_hull(pts)
    if len(hull) == 1:
        return EpsilonBound(math.hypot(*hull[0]))
    if len(hull) == 2:
        return EpsilonBound(_segment_distance(hull[0], hull[1]))
    edges = list(zip(hull, hull[1:] + hull[:1]))
    if all(_cross(a, b, (0.0, 0.0)) >= -1e-12 for a, b in edges):
        return EpsilonBound(0.0)
    return EpsilonBound(min(_segment_distance(a, b) for a, b in edges))


def half_root_set(d: int) -> list[complex]:
    """{exp(2*pi*i*j/d) : 0 <= j < d/2}."""
    return [complex(math.cos(2 * math.pi * j / d), math.sin(2 * math.pi * j / d))
            for j in range(d // 2)]


def half_root_lower_bound(d: int) -> float:
    return math.pi / d - math.pi / d**2


def connection_set_char_image(S: ConnectionSet, chi: MultChar) -> frozenset[int]:
    """Exponents {chi(x) : x in S}, as residues mod chi.period."""
    _require_nontrivial(chi)
    return frozenset(int(e) for e in np.unique(chi.values(S.elements)))


def exponents_to_complex(exps, period: int) -> list[complex]:
    return [complex(math.cos(2 * math.pi * e / period), math.sin(2 * math.pi * e / period))
            for e in sorted(exps)]
