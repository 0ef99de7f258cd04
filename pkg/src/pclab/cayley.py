"""Connection sets for Paley-like Cayley graphs on the additive group of a field."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import CongruenceViolated, DNotEven, NotCosetUnion, NotSymmetric
from .ff import FieldTower


@dataclass(frozen=True)
class ConnectionSpec:
    """Which connection set to build.

    kind is one of "paley", "gpaley", "peisert", "gpeisert", "peisert_type",
    "explicit".  ``d`` parametrises the generalized families; ``reps`` holds
    coset-representative exponents for "peisert_type"; ``elements`` holds
    field codes for "explicit".
    """

    kind: str
    d: int | None = None
    reps: tuple[int, ...] = ()
    elements: tuple[int, ...] = ()

    @classmethod
    def paley(cls):
        return cls("paley")

    @classmethod
    def gpaley(cls, d: int):
        return cls("gpaley", d=d)

    @classmethod
    def peisert(cls):
        return cls("peisert")

    @classmethod
    def gpeisert(cls, d: int):
        return cls("gpeisert", d=d)

    @classmethod
    def peisert_type(cls, reps):
        return cls("peisert_type", reps=tuple(int(r) for r in reps))

    @classmethod
    def explicit(cls, elements):
        return cls("explicit", elements=tuple(sorted(int(e) for e in elements)))

    def label(self) -> str:
        if self.kind in ("gpaley", "gpeisert"):
            return f"{self.kind}({self.d})"
        return self.kind


class ConnectionSet:
    """Membership table over the codes of the top field; 0 is never a member."""

    def __init__(self, tower: FieldTower, member: np.ndarray, spec: ConnectionSpec | None = None):
        member = np.asarray(member, dtype=bool).copy()
        if member.shape != (tower.order,):
            raise ValueError("membership table has the wrong length")
        if member[0]:
            raise ValueError("0 cannot belong to a connection set")
        member.setflags(write=False)
        self.tower = tower
        self.member = member
        self.spec = spec
        self.elements = np.flatnonzero(member)
        self.size = int(self.elements.size)
        self._mask = None

    def __len__(self):
        return self.size

    def __contains__(self, x) -> bool:
        return bool(self.member[int(x)])

    def __eq__(self, other):
        return isinstance(other, ConnectionSet) and np.array_equal(self.member, other.member)

    def __hash__(self):
        return hash(self.member.tobytes())

    @property
    def mask(self) -> int:
        if self._mask is None:
            self._mask = bits_from_bool(self.member)
        return self._mask

    def is_symmetric(self) -> bool:
        return bool(np.all(self.member[self.tower.neg(self.elements)]))

    def dlogs(self) -> list[int]:
        return sorted(int(t) for t in self.tower.log[self.elements])

    def to_json(self) -> list[int]:
        """Sorted discrete-log exponents of the members."""
        return self.dlogs()

    @classmethod
    def from_json(cls, tower: FieldTower, dlogs) -> "ConnectionSet":
        member = np.zeros(tower.order, dtype=bool)
        member[tower.power(np.asarray(list(dlogs), dtype=np.int64))] = True
        S = cls(tower, member, ConnectionSpec("explicit"))
        if not S.is_symmetric():
            raise NotSymmetric("connection set is not closed under negation")
        return S


def bits_from_bool(arr: np.ndarray) -> int:
    """Python-int bitset with bit i set iff arr[i]."""
    packed = np.packbits(np.asarray(arr, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _from_exponents(tower: FieldTower, keep: np.ndarray, spec) -> ConnectionSet:
    member = np.zeros(tower.order, dtype=bool)
    t = np.arange(tower.qm1)
    member[tower.exp[t[keep]]] = True
    return ConnectionSet(tower, member, spec)


def build_connection(spec: ConnectionSpec, tower: FieldTower) -> ConnectionSet:
    Q = tower.order
    t = np.arange(tower.qm1)
    kind = spec.kind
    if kind == "paley":
        if Q % 4 != 1:
            raise CongruenceViolated(f"Paley graph needs |F| = 1 mod 4, got {Q}")
        return _from_exponents(tower, t % 2 == 0, spec)
    if kind == "gpaley":
        d = spec.d
        if d is None or d < 2:
            raise ValueError("GPaley needs d >= 2")
        if Q % (2 * d) != 1:
            raise CongruenceViolated(f"GPaley({d}) needs |F| = 1 mod {2 * d}, got {Q}")
        return _from_exponents(tower, t % d == 0, spec)
    if kind == "peisert":
        if tower.p % 4 != 3:
            raise CongruenceViolated(f"Peisert graph needs p = 3 mod 4, got p={tower.p}")
        if tower.D % 2:
            raise CongruenceViolated(f"Peisert graph needs an even power of p, got {tower.p}^{tower.D}")
        return _from_exponents(tower, t % 4 <= 1, spec)
    if kind == "gpeisert":
        d = spec.d
        if d is None or d < 2:
            raise ValueError("GPeisert needs d >= 2")
        if d % 2:
            raise DNotEven(f"GPeisert needs even d, got {d}")
        if Q % (2 * d) != 1:
            raise CongruenceViolated(f"GPeisert({d}) needs |F| = 1 mod {2 * d}, got {Q}")
        return _from_exponents(tower, t % d < d // 2, spec)
    if kind == "peisert_type":
        if tower.N != 2:
            raise ValueError("Peisert-type connection sets live in F_{q^2} (N = 2)")
        reps = np.asarray(spec.reps, dtype=np.int64) % (tower.q + 1)
        S = _from_exponents(tower, np.isin(t % (tower.q + 1), reps), spec)
    elif kind == "explicit":
        member = np.zeros(Q, dtype=bool)
        member[list(spec.elements)] = True
        S = ConnectionSet(tower, member, spec)
    else:
        raise ValueError(f"unknown connection-set kind {kind!r}")
    if not S.is_symmetric():
        raise NotSymmetric("connection set is not closed under negation")
    return S


@dataclass(frozen=True)
class CosetDecomposition:
    m: int
    reps: tuple[int, ...]  # element codes, ascending by dlog
    rep_dlogs: tuple[int, ...]


def decompose_cosets(S: ConnectionSet, tower: FieldTower | None = None) -> CosetDecomposition:
    """Write S as a union of cosets c*F_q^* of the base multiplicative group."""
    tower = tower or S.tower
    if tower.N != 2:
        raise ValueError("coset decomposition needs a tower with N = 2")
    if S.size == 0:
        raise ValueError("empty connection set")
    # g^t and g^s share an F_q^* coset iff t = s mod (q+1)
    k = tower.q + 1
    t = tower.log[S.elements]
    counts = np.bincount(t % k, minlength=k)
    split = np.flatnonzero((counts > 0) & (counts < tower.q - 1))
    if split.size:
        r = int(split[0])
        witness = int(S.elements[np.flatnonzero(t % k == r)[0]])
        raise NotCosetUnion(f"coset of g^{r} is only partly contained in S", witness)
    reps = tuple(int(r) for r in np.flatnonzero(counts))
    return CosetDecomposition(len(reps), tuple(tower.power(r) for r in reps), reps)


@dataclass(frozen=True)
class PeisertTypeResult:
    ok: bool
    m: int | None = None
    reps: tuple[int, ...] = ()
    reason: str | None = None

    def __bool__(self):
        return self.ok


def is_peisert_type(S: ConnectionSet, tower: FieldTower | None = None) -> PeisertTypeResult:
    tower = tower or S.tower
    if tower.N != 2:
        raise ValueError("Peisert-type graphs live on F_{q^2} (N = 2)")
    base_units = tower.base_field()[1:]
    if not np.all(S.member[base_units]):
        return PeisertTypeResult(False, reason="MissingBaseUnits")
    try:
        dec = decompose_cosets(S, tower)
    except NotCosetUnion:
        return PeisertTypeResult(False, reason="NotCosetUnion")
    if dec.m > (tower.q + 1) // 2:
        return PeisertTypeResult(False, m=dec.m, reps=dec.reps, reason="TooManyCosets")
    return PeisertTypeResult(True, m=dec.m, reps=dec.reps)


@dataclass(eq=False)
class CayleyGraph:
    """Cay(F^+, S); adjacency is looked up in the membership table on demand."""

    tower: FieldTower
    S: ConnectionSet
    _rows: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def order(self) -> int:
        return self.tower.order

    @property
    def degree(self) -> int:
        return self.S.size

    def adjacent(self, u, v) -> bool:
        return bool(self.S.member[self.tower.sub(int(u), int(v))])

    def adjacency_among(self, vertices, v) -> np.ndarray:
        """Boolean vector: which of ``vertices`` are adjacent to v."""
        return self.S.member[self.tower.sub(np.asarray(vertices, dtype=np.int64), int(v))]

    def neighbors(self, v) -> np.ndarray:
        """Sorted codes of the neighbours of v."""
        return np.sort(self.tower.add(int(v), self.S.elements))

    def neighbor_mask(self, v) -> int:
        """Neighbourhood of v as a Python-int bitset indexed by field code (cached)."""
        v = int(v)
        row = self._rows.get(v)
        if row is None:
            member = np.zeros(self.order, dtype=bool)
            member[self.tower.add(v, self.S.elements)] = True
            row = bits_from_bool(member)
            with self._lock:
                row = self._rows.setdefault(v, row)
        return row

    def common_neighbors(self, vertices) -> np.ndarray:
        """Boolean table of the vertices adjacent to every vertex in ``vertices``."""
        ok = np.ones(self.order, dtype=bool)
        everything = np.arange(self.order)
        for v in vertices:
            ok &= self.S.member[self.tower.sub(everything, int(v))]
        return ok


def cayley_graph(tower: FieldTower, spec: ConnectionSpec) -> CayleyGraph:
    return CayleyGraph(tower, build_connection(spec, tower))
