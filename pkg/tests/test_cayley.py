import numpy as np
import pytest

from pclab.cayley import (
    ConnectionSet,
    ConnectionSpec,
    build_connection,
    cayley_graph,
    decompose_cosets,
    is_peisert_type,
)
from pclab.errors import CongruenceViolated, DNotEven, NotCosetUnion, NotSymmetric
from pclab.ff import build_tower


def tw(q, N=2):
    p = {3: 3, 5: 5, 7: 7, 9: 3, 11: 11, 13: 13, 25: 5}[q]
    n = {9: 2, 25: 2}.get(q, 1)
    return build_tower(p, n, N)


def test_sizes():
    assert build_connection(ConnectionSpec.paley(), tw(3)).size == 4
    assert build_connection(ConnectionSpec.gpaley(3), tw(5)).size == 8
    assert build_connection(ConnectionSpec.gpeisert(10), tw(9)).size == 40
    assert build_connection(ConnectionSpec.peisert(), tw(7)).size == 24


def test_paley_is_the_squares():
    t = tw(5)
    S = build_connection(ConnectionSpec.paley(), t)
    squares = set(t.mul(np.arange(1, 25), np.arange(1, 25)).tolist())
    assert set(S.elements.tolist()) == squares


def test_builder_errors():
    with pytest.raises(CongruenceViolated):
        build_connection(ConnectionSpec.paley(), build_tower(3, 1, 1))
    with pytest.raises(CongruenceViolated):
        build_connection(ConnectionSpec.peisert(), build_tower(5, 1, 2))
    with pytest.raises(CongruenceViolated):
        build_connection(ConnectionSpec.peisert(), build_tower(3, 1, 3))
    with pytest.raises(DNotEven):
        build_connection(ConnectionSpec.gpeisert(3), tw(5))
    with pytest.raises(CongruenceViolated):
        build_connection(ConnectionSpec.gpaley(5), tw(7))
    t = tw(3)
    with pytest.raises(NotSymmetric):
        build_connection(ConnectionSpec.explicit([t.power(1)]), t)


FAMILIES = [
    (3, ConnectionSpec.paley()), (5, ConnectionSpec.paley()), (9, ConnectionSpec.paley()),
    (7, ConnectionSpec.peisert()), (11, ConnectionSpec.peisert()),
    (5, ConnectionSpec.gpaley(3)), (11, ConnectionSpec.gpaley(4)),
    (9, ConnectionSpec.gpeisert(10)), (5, ConnectionSpec.gpeisert(6)),
]


@pytest.mark.parametrize("q,spec", FAMILIES, ids=lambda x: str(x))
def test_symmetric_and_scaling_invariant(q, spec):
    t = tw(q)
    S = build_connection(spec, t)
    assert S.is_symmetric() and 0 not in S
    base_units = t.base_field()[1:]
    scaled = t.mul(base_units[:, None], S.elements[None, :])
    assert np.all(S.member[scaled])


@pytest.mark.parametrize("q,spec", FAMILIES, ids=lambda x: str(x))
def test_translation_invariance_and_regularity(q, spec):
    t = tw(q)
    G = cayley_graph(t, spec)
    rng = np.random.default_rng(7)
    for u, v, a in rng.integers(0, t.order, size=(100, 3)):
        assert G.adjacent(u, v) == G.adjacent(t.add(int(u), int(a)), t.add(int(v), int(a)))
        assert G.adjacent(u, v) == G.adjacent(v, u)
    assert np.array_equal(G.neighbors(0), S_sorted := np.sort(G.S.elements))
    assert G.neighbor_mask(0).bit_count() == S_sorted.size
    for v in rng.integers(0, t.order, 20):
        assert G.neighbor_mask(int(v)).bit_count() == G.degree
        assert G.neighbors(int(v)).size == G.degree


@pytest.mark.parametrize("q", [3, 5, 7, 9, 11])
def test_paley_strongly_regular(q):
    t = tw(q)
    Q = t.order
    G = cayley_graph(t, ConnectionSpec.paley())
    A = np.zeros((Q, Q), dtype=np.int64)
    for v in range(Q):
        A[v, G.neighbors(v)] = 1
    A2 = A @ A
    adj = A.astype(bool) & ~np.eye(Q, dtype=bool)
    non = ~A.astype(bool) & ~np.eye(Q, dtype=bool)
    assert set(A2[adj].tolist()) == {(Q - 5) // 4}
    assert set(A2[non].tolist()) == {(Q - 1) // 4}


@pytest.mark.parametrize("q,d", [(5, 6), (9, 10), (11, 4), (7, 8), (11, 12)])
def test_gpeisert_is_union_of_gpaley_cosets(q, d):
    t = tw(q)
    star = build_connection(ConnectionSpec.gpeisert(d), t)
    gp = build_connection(ConnectionSpec.gpaley(d), t)
    assert np.all(star.member[gp.elements])
    tlog = np.arange(t.qm1)
    assert np.array_equal(star.member[t.power(tlog)], tlog % d < d // 2)
    assert star.size == (t.order - 1) // 2


def test_peisert_equals_gpeisert_4():
    t = tw(7)
    assert build_connection(ConnectionSpec.peisert(), t) == build_connection(ConnectionSpec.gpeisert(4), t)


@pytest.mark.parametrize("q,d", [(5, 3), (5, 6), (7, 4), (9, 5), (11, 3), (11, 4), (11, 6), (11, 12)])
def test_coset_counts(q, d):
    t = tw(q)
    dec = decompose_cosets(build_connection(ConnectionSpec.gpaley(d), t))
    assert dec.m == (q + 1) // d
    assert dec.rep_dlogs[0] == 0
    if d % 2 == 0:
        assert decompose_cosets(build_connection(ConnectionSpec.gpeisert(d), t)).m == (q + 1) // 2


def test_base_units_alone_is_one_coset():
    t = tw(7)
    S = build_connection(ConnectionSpec.peisert_type([0]), t)
    assert np.array_equal(S.elements, t.base_field()[1:])
    assert decompose_cosets(S).m == 1
    assert S == build_connection(ConnectionSpec.gpaley(8), t)


def test_not_coset_union_witness():
    t = tw(5)
    S = build_connection(ConnectionSpec.gpaley(4), t)
    with pytest.raises(NotCosetUnion) as info:
        decompose_cosets(S)
    assert info.value.witness in S
    assert is_peisert_type(S).reason == "MissingBaseUnits"


def test_peisert_type_detection():
    assert is_peisert_type(build_connection(ConnectionSpec.paley(), tw(9))).m == 5
    assert is_peisert_type(build_connection(ConnectionSpec.peisert(), tw(7))).ok
    t = tw(5)
    too_many = build_connection(ConnectionSpec.peisert_type([0, 1, 2, 3]), t)
    r = is_peisert_type(too_many)
    assert not r.ok and r.reason == "TooManyCosets"


def test_json_round_trip():
    t = tw(9)
    S = build_connection(ConnectionSpec.gpeisert(10), t)
    assert ConnectionSet.from_json(t, S.to_json()) == S
