"""Maximum-clique search, enumeration and structure checks for Cayley graphs on fields.

All searches look only at cliques through the vertex 0: translation
x -> x + a is an automorphism of every Cayley graph, so nothing is lost.
Inside the neighbourhood of 0 the solver is a bitset branch and bound in the
MCQ/BBMC style: vertices are relabelled in reverse degeneracy order and a
greedy sequential colouring bounds every branch.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cayley import CayleyGraph, bits_from_bool, is_peisert_type
from .errors import NotAClique, SearchTimeout, ZeroMissing
from .ff import FieldTower


@dataclass(frozen=True)
class VertexSet:
    """Set of field codes stored as a Python-int bitset."""

    bits: int

    @classmethod
    def of(cls, vertices) -> "VertexSet":
        bits = 0
        for v in vertices:
            bits |= 1 << int(v)
        return cls(bits)

    def __len__(self):
        return self.bits.bit_count()

    @property
    def size(self) -> int:
        return len(self)

    def __iter__(self):
        b = self.bits
        while b:
            low = b & -b
            yield low.bit_length() - 1
            b ^= low

    def __contains__(self, v) -> bool:
        return bool(self.bits >> int(v) & 1)

    def __or__(self, other):
        return VertexSet(self.bits | other.bits)

    def issubset(self, other: "VertexSet") -> bool:
        return self.bits & ~other.bits == 0

    def array(self) -> np.ndarray:
        return np.fromiter(iter(self), dtype=np.int64)

    def dlogs(self, tower: FieldTower) -> list[int]:
        """Sorted discrete logs; the zero element is written as -1."""
        return sorted(int(tower.log[v]) for v in self)


def canonical_key(C: VertexSet, tower: FieldTower) -> tuple[int, ...]:
    return tuple(C.dlogs(tower))


# -- bitset kernels -------------------------------------------------------

class _Clock:
    def __init__(self, budget_s):
        self.deadline = None if budget_s is None else time.monotonic() + budget_s
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.deadline is not None and self.nodes & 255 == 1:
            if time.monotonic() > self.deadline:
                raise _OutOfTime


class _OutOfTime(Exception):
    pass


def _color_sort(P: int, adj: list[int]) -> list[tuple[int, int]]:
    """Greedy sequential colouring of P; returns (vertex, colour) by increasing colour."""
    order = []
    color = 0
    U = P
    while U:
        color += 1
        Q = U
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            U ^= low
            Q &= ~adj[v]
            Q &= ~low
            order.append((v, color))
    return order


def _degeneracy_order(adj: list[int]) -> list[int]:
    """Smallest-last elimination order, reversed (dense core first)."""
    n = len(adj)
    alive = (1 << n) - 1
    deg = [a.bit_count() for a in adj]
    removed = []
    for _ in range(n):
        v = min((u for u in range(n) if alive >> u & 1), key=lambda u: (deg[u], u))
        removed.append(v)
        alive &= ~(1 << v)
        nb = adj[v] & alive
        while nb:
            low = nb & -nb
            deg[low.bit_length() - 1] -= 1
            nb ^= low
    return removed[::-1]


@dataclass
class LocalGraph:
    """Induced subgraph on ``vertices`` (field codes) with local bitset rows."""

    vertices: np.ndarray
    adj: list[int]

    @property
    def n(self) -> int:
        return len(self.adj)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def to_global(self, local_bits: int | list[int]) -> list[int]:
        if isinstance(local_bits, int):
            idx = [i for i in range(self.n) if local_bits >> i & 1]
        else:
            idx = local_bits
        return [int(self.vertices[i]) for i in idx]


def local_graph(graph: CayleyGraph, vertices, reorder: bool = True) -> LocalGraph:
    verts = np.asarray(vertices, dtype=np.int64)

    def rows(vs):
        return [bits_from_bool(graph.adjacency_among(vs, v)) for v in vs]

    adj = rows(verts)
    if reorder and len(verts) > 1:
        verts = verts[_degeneracy_order(adj)]
        adj = rows(verts)
    return LocalGraph(verts, adj)


def local_graph_from_adjacency(adj: list[int], reorder: bool = True) -> LocalGraph:
    """LocalGraph from plain bitset rows (vertex labels 0..n-1)."""
    verts = np.arange(len(adj))
    if reorder and len(adj) > 1:
        order = _degeneracy_order(adj)
        pos = {v: i for i, v in enumerate(order)}
        new = []
        for v in order:
            row = 0
            b = adj[v]
            while b:
                low = b & -b
                row |= 1 << pos[low.bit_length() - 1]
                b ^= low
            new.append(row)
        return LocalGraph(np.asarray(order), new)
    return LocalGraph(verts, list(adj))


def _greedy_clique(P: int, adj: list[int]) -> list[int]:
    R = []
    while P:
        best, best_deg = -1, -1
        b = P
        while b:
            low = b & -b
            v = low.bit_length() - 1
            d = (adj[v] & P).bit_count()
            if d > best_deg:
                best, best_deg = v, d
            b ^= low
        R.append(best)
        P &= adj[best]
    return R


def _max_clique_bits(adj: list[int], P: int, clock: _Clock, lower: list[int] | None = None):
    best = list(lower or [])

    def expand(R, P):
        nonlocal best
        clock.tick()
        for v, c in reversed(_color_sort(P, adj)):
            if len(R) + c <= len(best):
                return
            R.append(v)
            NP = P & adj[v]
            if NP:
                expand(R, NP)
            elif len(R) > len(best):
                best = list(R)
            R.pop()
            P &= ~(1 << v)

    try:
        expand([], P)
    except _OutOfTime:
        return best, False
    return best, True


def _enumerate_bits(adj: list[int], P: int, target: int, clock: _Clock) -> list[list[int]]:
    """Every clique of exactly ``target`` vertices inside P, each once."""
    out = []
    if target <= 0:
        return [[]]

    def expand(R, P):
        clock.tick()
        for v, c in reversed(_color_sort(P, adj)):
            if len(R) + c < target:
                return
            R.append(v)
            if len(R) == target:
                out.append(list(R))
            else:
                NP = P & adj[v]
                if NP:
                    expand(R, NP)
            R.pop()
            P &= ~(1 << v)

    expand([], P)
    return out


def _enumerate_job(args):
    adj, P, target, budget_s = args
    clock = _Clock(budget_s)
    try:
        return _enumerate_bits(adj, P, target, clock), True
    except _OutOfTime:
        return None, False


# -- public search API ----------------------------------------------------

@dataclass(frozen=True)
class CliqueResult:
    omega: int
    witness: VertexSet
    nodes: int = 0


def max_clique(graph: CayleyGraph, budget_s: float | None = None) -> CliqueResult:
    """Exact clique number with a witness clique containing 0."""
    lg = local_graph(graph, graph.S.elements)
    clock = _Clock(budget_s)
    greedy = _greedy_clique(lg.full, lg.adj)
    best, done = _max_clique_bits(lg.adj, lg.full, clock, greedy)
    witness = VertexSet.of([0] + lg.to_global(best))
    if not done:
        upper = 1 + max((c for _, c in _color_sort(lg.full, lg.adj)), default=0)
        raise SearchTimeout(f"clique search exceeded {budget_s}s budget",
                            lower=len(witness), upper=upper, witness=witness)
    return CliqueResult(len(witness), witness, clock.nodes)


def scaling_subfield(graph: CayleyGraph) -> int:
    """Largest k such that S is invariant under multiplication by F_{p^k}^*."""
    tower = graph.tower
    t = tower.log[graph.S.elements]
    for k in sorted((k for k in range(1, tower.D + 1) if tower.D % k == 0), reverse=True):
        step = tower.qm1 // (tower.p**k - 1)
        # closed under K^* iff membership depends only on t mod step
        counts = np.bincount(t % step, minlength=step)
        if np.all((counts == 0) | (counts == tower.p**k - 1)):
            return k
    return 1


def enumerate_max_cliques_zero(graph: CayleyGraph, omega: int, *,
                               contain=(), budget_s: float | None = None,
                               workers: int = 1, use_symmetry: bool = True) -> list[VertexSet]:
    """All cliques of size ``omega`` containing 0 (and ``contain``), canonically sorted.

    Without extra required vertices the search is split by scaling orbits:
    if S*K^* = S for a subfield K, then x -> a*x (a in K^*) fixes 0 and maps
    cliques to cliques.  Each clique through 0 is a K^*-multiple of one that
    contains the orbit representative c_j of the first orbit it meets and
    avoids all earlier orbits, so only those are searched and the rest are
    recovered by scaling.
    """
    tower = graph.tower
    fixed = [0] + [int(c) for c in contain if int(c) != 0]
    for i, a in enumerate(fixed):
        for b in fixed[i + 1:]:
            if not graph.adjacent(a, b):
                return []
    if omega <= len(fixed):
        return [VertexSet.of(fixed)] if omega == len(fixed) else []

    jobs = []
    k = scaling_subfield(graph) if use_symmetry and len(fixed) == 1 else None
    if k is not None and tower.p**k > 2:
        step = tower.qm1 // (tower.p**k - 1)
        t_all = tower.log[graph.S.elements]
        orbit_reps = sorted(set(int(r) for r in t_all % step))
        candidates = graph.S.member.copy()
        scalars = tower.prime_subfield(k)[1:]
        for r in orbit_reps:
            c = tower.power(r)
            cand = candidates & graph.common_neighbors([c])
            cand[c] = False
            jobs.append(([0, c], np.flatnonzero(cand)))
            # later orbits must avoid this one
            candidates[tower.power(np.arange(r, tower.qm1, step))] = False
    else:
        scalars = None
        cand = graph.common_neighbors(fixed)
        cand[fixed] = False
        jobs.append((fixed, np.flatnonzero(cand)))

    tasks = []
    graphs = []
    for base, verts in jobs:
        need = omega - len(base)
        lg = local_graph(graph, verts)
        graphs.append((base, lg))
        tasks.append((lg.adj, lg.full, need, budget_s))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_enumerate_job, tasks))
    else:
        results = [_enumerate_job(t) for t in tasks]

    found: set[int] = set()
    for (base, lg), (cliques, done) in zip(graphs, results):
        if not done:
            raise SearchTimeout(f"clique enumeration exceeded {budget_s}s budget")
        for loc in cliques:
            members = np.asarray(base + lg.to_global(loc), dtype=np.int64)
            if scalars is None:
                found.add(VertexSet.of(members).bits)
            else:
                for a in scalars:
                    found.add(VertexSet.of(tower.scale(a, members)).bits)
    out = [VertexSet(b) for b in found]
    for C in out:
        if not is_clique(graph, C):
            raise AssertionError("enumeration produced a non-clique")
    return sorted(out, key=lambda C: canonical_key(C, tower))


def is_clique(graph: CayleyGraph, C) -> bool:
    arr = np.fromiter((int(v) for v in C), dtype=np.int64)
    if arr.size < 2:
        return True
    diff = graph.tower.sub(arr[:, None], arr[None, :])
    off = ~np.eye(arr.size, dtype=bool)
    return bool(np.all(graph.S.member[diff[off]]))


# -- structure --------------------------------------------------------------

@dataclass(frozen=True)
class StructureFlags:
    is_additive_subgroup: bool
    is_Fp_subspace: bool
    is_subfield: bool
    is_Fq_coset_line: bool


def classify_structure(C, tower: FieldTower) -> StructureFlags:
    arr = np.fromiter((int(v) for v in C), dtype=np.int64)
    if 0 not in arr:
        raise ZeroMissing("classification needs 0 in the set")
    members = np.zeros(tower.order, dtype=bool)
    members[arr] = True
    subgroup = bool(np.all(members[tower.sub(arr[:, None], arr[None, :])]))
    subfield = subgroup and bool(members[1]) and bool(
        np.all(members[tower.mul(arr[:, None], arr[None, :])]))
    line = False
    base = tower.base_field()
    if arr.size == base.size:
        x = int(arr[arr != 0][0]) if arr.size > 1 else 0
        line = x != 0 and bool(np.all(members[tower.scale(x, base)]))
    # a finite additive subgroup in characteristic p is an F_p-subspace
    return StructureFlags(subgroup, subgroup, subfield, line)


@dataclass(frozen=True)
class UniquenessResult:
    unique_subfield: bool
    omega: int
    cliques_01: list[VertexSet]
    violations: list[VertexSet]


def unique_01_max_clique(graph: CayleyGraph, omega: int | None = None,
                         budget_s: float | None = None) -> UniquenessResult:
    """Is the base field F_q the only maximum clique through 0 and 1?"""
    if omega is None:
        omega = max_clique(graph, budget_s).omega
    cliques = enumerate_max_cliques_zero(graph, omega, contain=[1], budget_s=budget_s)
    Fq = VertexSet.of(graph.tower.base_field())
    violations = [C for C in cliques if C != Fq]
    return UniquenessResult(len(cliques) == 1 and not violations, omega, cliques, violations)


@dataclass(frozen=True)
class MaximalityResult:
    maximal: bool
    witness: int | None = None


def _least_dlog(tower: FieldTower, codes) -> int:
    codes = np.asarray(codes, dtype=np.int64)
    return int(codes[np.argmin(tower.log[codes])])


def is_maximal_clique(graph: CayleyGraph, C) -> MaximalityResult:
    C = list(int(v) for v in C)
    if not is_clique(graph, C):
        raise NotAClique("the given set is not a clique")
    ok = graph.common_neighbors(C)
    ok[C] = False
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return MaximalityResult(True)
    return MaximalityResult(False, _least_dlog(graph.tower, hits))


def subfield_clique_condition(tower: FieldTower, d: int) -> bool:
    """d | (q^N - 1)/(q - 1), cross-checked by testing every pair of F_q when true."""
    from .cayley import ConnectionSpec, build_connection

    q = tower.q
    cond = ((q**tower.N - 1) // (q - 1)) % d == 0
    if cond:
        graph = CayleyGraph(tower, build_connection(ConnectionSpec.gpaley(d), tower))
        if not is_clique(graph, tower.base_field()):
            raise AssertionError(f"F_{q} is not a clique although {d} | (q^N-1)/(q-1)")
    return cond


@dataclass(frozen=True)
class SubspaceExtension:
    h: int
    V: VertexSet


def find_subspace_extension(graph: CayleyGraph, K) -> SubspaceExtension | None:
    """Least-dlog h (up to K^*-scaling) with K + hK a clique, or None."""
    tower = graph.tower
    K = np.asarray(sorted(int(x) for x in K), dtype=np.int64)
    step = tower.qm1 // (K.size - 1)
    for t in range(1, step):
        h = tower.power(t)
        V = tower.add(K[:, None], tower.scale(h, K)[None, :]).ravel()
        if np.all(graph.S.member[V[V != 0]]):
            return SubspaceExtension(h, VertexSet.of(V))
    return None


# -- stability --------------------------------------------------------------

def stability_threshold(q: int, m: int) -> float:
    return q - (1 - m / (q + 1)) * math.sqrt(q)


def _maximal_cliques_at_least(adj: list[int], P: int, size: int, clock: _Clock) -> list[list[int]]:
    """Bron-Kerbosch with pivoting: maximal cliques inside P with >= ``size`` vertices."""
    out = []

    def bk(R, P, X):
        clock.tick()
        if not P:
            if not X and len(R) >= size:
                out.append(list(R))
            return
        if len(R) + P.bit_count() < size:
            return
        if len(R) + _color_sort(P, adj)[-1][1] < size:
            return
        PX = P | X
        pivot, best = -1, -1
        while PX:
            low = PX & -PX
            u = low.bit_length() - 1
            d = (adj[u] & P).bit_count()
            if d > best:
                pivot, best = u, d
            PX ^= low
        cand = P & ~adj[pivot]
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            R.append(v)
            bk(R, P & adj[v], X & adj[v])
            R.pop()
            P &= ~low
            X |= low
            cand ^= low

    bk([], P, 0)
    return out


@dataclass
class StabilityReport:
    q: int
    m: int
    threshold: float
    min_size: int
    hypothesis_holds: bool
    large_cliques: list[VertexSet] = field(default_factory=list)
    subspace_cliques: list[VertexSet] = field(default_factory=list)
    uncontained: list[VertexSet] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return not self.uncontained


def verify_stability(graph: CayleyGraph, budget_s: float | None = None) -> StabilityReport:
    """Every maximal 0-clique above the stability threshold sits in a subspace clique of size q."""
    tower = graph.tower
    pt = is_peisert_type(graph.S, tower)
    if not pt.ok:
        raise ValueError(f"not a Peisert-type graph: {pt.reason}")
    q, m = tower.q, pt.m
    # m = (q+1)/2 is outside the guaranteed range; the containment is still checked
    hyp = 2 * m < q + 1
    thr = stability_threshold(q, m)
    min_size = math.floor(thr) + 1
    lg = local_graph(graph, graph.S.elements)
    clock = _Clock(budget_s)
    try:
        local = _maximal_cliques_at_least(lg.adj, lg.full, min_size - 1, clock)
    except _OutOfTime:
        raise SearchTimeout(f"stability enumeration exceeded {budget_s}s budget") from None
    large = sorted((VertexSet.of([0] + lg.to_global(c)) for c in local),
                   key=lambda C: canonical_key(C, tower))
    maxima = enumerate_max_cliques_zero(graph, q, budget_s=budget_s)
    subspaces = [C for C in maxima if classify_structure(C, tower).is_additive_subgroup]
    uncontained = [C for C in large if not any(C.issubset(V) for V in subspaces)]
    return StabilityReport(q, m, thr, min_size, hyp, large, subspaces, uncontained)


# -- reports and oracle ------------------------------------------------------

@dataclass
class CliqueReport:
    omega: int
    max_cliques_zero: list[VertexSet]
    flags: list[StructureFlags]
    field: dict


def clique_report(graph: CayleyGraph, budget_s: float | None = None) -> CliqueReport:
    omega = max_clique(graph, budget_s).omega
    cliques = enumerate_max_cliques_zero(graph, omega, budget_s=budget_s)
    flags = [classify_structure(C, graph.tower) for C in cliques]
    return CliqueReport(omega, cliques, flags, graph.tower.describe())


def brute_force_clique_number(neighbors: list[set[int]]) -> int:
    """Unpruned enumeration of every clique, seeded by each vertex's later neighbours."""
    best = 1 if neighbors else 0

    def grow(size, cand):
        nonlocal best
        best = max(best, size)
        for v in sorted(cand):
            grow(size + 1, {u for u in cand if u > v and u in neighbors[v]})

    for v in range(len(neighbors)):
        grow(1, {u for u in neighbors[v] if u > v})
    return best


def clique_number_of(adj: list[int], budget_s: float | None = None) -> int:
    """Branch-and-bound clique number of an explicit bitset graph."""
    lg = local_graph_from_adjacency(adj)
    clock = _Clock(budget_s)
    best, done = _max_clique_bits(lg.adj, lg.full, clock, _greedy_clique(lg.full, lg.adj))
    if not done:
        raise SearchTimeout("clique search exceeded budget", lower=len(best))
    return len(best)
