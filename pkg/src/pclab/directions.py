"""Point sets in AG(2, q), their direction sets, and linearity over subfields.

Coordinates are field codes of elements of the base field F_q of a tower;
for a standalone plane use a tower with N = 1.  The vertical direction is
the sentinel ``INF``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BasisDegenerate, OriginMissing, ScaleTooLarge, TooSmall
from .ff import FieldTower, divisors

INF = "inf"

Point = tuple[int, int]


@dataclass(frozen=True)
class Embedding:
    """pi(a*u + b*v) = (a, b) for a, b in F_q, with {u, v} a basis of F_{q^2} over F_q."""

    tower: FieldTower
    u: int
    v: int

    def __post_init__(self):
        if self.tower.N != 2:
            raise BasisDegenerate("embeddings need a tower with N = 2")
        u, v = int(self.u), int(self.v)
        if u == 0 or v == 0 or self.tower.in_subfield(self.tower.div(v, u), 1):
            raise BasisDegenerate(f"{{{u}, {v}}} is not a basis over F_q")
        base = self.tower.base_field()
        a, b = np.meshgrid(base, base, indexing="ij")
        images = self.tower.add(self.tower.scale(u, a), self.tower.scale(v, b))
        lookup = np.full(self.tower.order, -1, dtype=np.int64)
        lookup[images.ravel()] = np.arange(images.size)
        object.__setattr__(self, "_base", base)
        object.__setattr__(self, "_lookup", lookup)

    def point(self, x) -> Point:
        i = int(self._lookup[int(x)])
        q = self._base.size
        return int(self._base[i // q]), int(self._base[i % q])

    def preimage(self, pt: Point) -> int:
        a, b = pt
        return int(self.tower.add(self.tower.mul(a, self.u), self.tower.mul(b, self.v)))


def default_embedding(tower: FieldTower, S=None) -> Embedding:
    """Basis (1, v) with v the least-dlog nonzero element outside S (or outside F_q)."""
    t = np.arange(tower.qm1)
    cand = tower.exp[t]
    if S is not None:
        cand = cand[~S.member[cand]]
    else:
        cand = cand[t % (tower.q + 1) != 0]
    return Embedding(tower, 1, int(cand[0]))


def embed(C, e: Embedding) -> frozenset[Point]:
    return frozenset(e.point(x) for x in C)


def preimage(U, e: Embedding) -> set[int]:
    return {e.preimage(pt) for pt in U}


def direction_set(U, tower: FieldTower) -> frozenset:
    """Slopes (y_j - y_i)/(x_j - x_i) over all pairs, with INF for vertical pairs."""
    pts = sorted(set(U))
    if len(pts) < 2:
        raise TooSmall("a direction set needs at least two points")
    arr = np.asarray(pts, dtype=np.int64)
    i, j = np.triu_indices(len(pts), k=1)
    dx = tower.sub(arr[j, 0], arr[i, 0])
    dy = tower.sub(arr[j, 1], arr[i, 1])
    vertical = dx == 0
    out = set(int(s) for s in np.unique(tower.div(dy[~vertical], dx[~vertical])))
    if vertical.any():
        out.add(INF)
    return frozenset(out)


def subfield_orders(tower: FieldTower) -> list[int]:
    """Orders p^k of the subfields of the base F_q, largest first."""
    return [tower.p**k for k in sorted(divisors(tower.n), reverse=True)]


def _subfield_of_order(tower: FieldTower, order: int) -> np.ndarray:
    k = round(math.log(order, tower.p))
    return tower.prime_subfield(k)


def is_K_linear(U, tower: FieldTower, K_order: int) -> bool:
    """Is U (containing the origin) closed under addition and scaling by F_{K_order}?"""
    pts = set(U)
    if (0, 0) not in pts:
        raise OriginMissing("linearity is defined for sets through the origin")
    arr = np.asarray(sorted(pts), dtype=np.int64)
    q = tower.order
    keys = set((arr[:, 0] * q + arr[:, 1]).tolist())
    sx = tower.add(arr[:, None, 0], arr[None, :, 0]).ravel()
    sy = tower.add(arr[:, None, 1], arr[None, :, 1]).ravel()
    if not set((sx * q + sy).tolist()) <= keys:
        return False
    K = _subfield_of_order(tower, K_order)
    if K.size <= tower.p:
        return True
    # closure under addition plus one primitive element of K gives all of K
    zeta = tower.power(tower.qm1 // (K.size - 1))
    mx = tower.scale(zeta, arr[:, 0])
    my = tower.scale(zeta, arr[:, 1])
    return set((mx * q + my).tolist()) <= keys


def classify_linearity(U, tower: FieldTower) -> int | None:
    """Order of the largest subfield K of F_q for which U is K-linear, else None.

    Any two embeddings of F_{q^2} into AG(2, q) differ by an F_q-linear map
    of the plane, which preserves K-subspaces for every K ⊆ F_q, so testing
    the given coordinates settles the existential version as well.
    """
    for order in subfield_orders(tower):
        if is_K_linear(U, tower, order):
            return order
    return None


def function_graph(f, tower: FieldTower) -> frozenset[Point]:
    """Graph {(x, f(x))} of f over the base field; f is a mapping or a callable."""
    base = tower.base_field()
    get = f.__getitem__ if hasattr(f, "__getitem__") else f
    return frozenset((int(x), int(get(int(x)))) for x in base)


@dataclass(frozen=True)
class BallVerdict:
    N: int
    K_order: int | None
    holds: bool
    branch: str  # "many_directions", "linear", or "violation"


def verify_ball_dichotomy(f, tower: FieldTower) -> BallVerdict:
    """Either N >= (q+3)/2, or the graph is K-linear with N >= q/|K| + 1 when K != F_q."""
    U = function_graph(f, tower)
    q = tower.q
    D = direction_set(U, tower)
    if INF in D:
        raise AssertionError("the graph of a function cannot determine the vertical direction")
    N = len(D)
    f0 = next(y for x, y in U if x == 0)
    U0 = frozenset((x, int(tower.sub(y, f0))) for x, y in U)
    K = classify_linearity(U0, tower)
    if 2 * N >= q + 3:
        return BallVerdict(N, K, True, "many_directions")
    if K is not None and (K == q or N >= q // K + 1):
        return BallVerdict(N, K, True, "linear")
    return BallVerdict(N, K, False, "violation")


@dataclass(frozen=True)
class ExtensionResult:
    hypothesis_holds: bool
    extension: frozenset | None
    directions: frozenset

    @property
    def contradiction(self) -> bool:
        return self.hypothesis_holds and self.extension is None


def extension_hypothesis(size: int, n_dirs: int, q: int) -> bool:
    """Is there alpha in [1/2, 1] with q - size <= alpha*sqrt(q) and n_dirs < (q+1)(1 - alpha)?"""
    k = q - size
    alpha = max(0.5, k / math.sqrt(q))
    return alpha <= 1 and n_dirs < (q + 1) * (1 - alpha)


def search_extension(U, tower: FieldTower, max_q: int = 13) -> ExtensionResult:
    """Brute-force U' ⊇ U with |U'| = q and the same direction set."""
    q = tower.q
    if q > max_q:
        raise ScaleTooLarge(f"extension search is brute force; q={q} exceeds {max_q}")
    U = frozenset(U)
    k = q - len(U)
    if k < 0 or k > math.sqrt(q):
        raise ValueError(f"|U| = {len(U)} is not within sqrt(q) of q = {q}")
    D = direction_set(U, tower)
    hyp = extension_hypothesis(len(U), len(D), q)
    if k == 0:
        return ExtensionResult(hyp, U, D)
    base = [int(x) for x in tower.base_field()]

    def slope(a, b):
        dx = tower.sub(b[0], a[0])
        if dx == 0:
            return INF
        return tower.div(tower.sub(b[1], a[1]), dx)

    cands = [pt for pt in itertools.product(base, base)
             if pt not in U and all(slope(pt, u) in D for u in U)]
    ok = {a: {b for b in cands if b != a and slope(a, b) in D} for a in cands}

    def pick(chosen, pool):
        if len(chosen) == k:
            return chosen
        for i, c in enumerate(pool):
            rest = [b for b in pool[i + 1:] if b in ok[c]]
            if len(chosen) + 1 + len(rest) >= k:
                got = pick(chosen + [c], rest)
                if got is not None:
                    return got
        return None

    got = pick([], sorted(cands))
    ext = None if got is None else U | frozenset(got)
    return ExtensionResult(hyp, ext, D)
