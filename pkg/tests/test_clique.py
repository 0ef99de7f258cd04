import networkx as nx
import numpy as np
import pytest

from pclab.cayley import ConnectionSpec, cayley_graph, is_peisert_type
from pclab.clique import (
    VertexSet,
    brute_force_clique_number,
    classify_structure,
    clique_number_of,
    enumerate_max_cliques_zero,
    find_subspace_extension,
    is_clique,
    is_maximal_clique,
    max_clique,
    stability_threshold,
    subfield_clique_condition,
    unique_01_max_clique,
    verify_stability,
)
from pclab.errors import NotAClique, SearchTimeout, ZeroMissing
from pclab.ff import build_tower


def graph(p, n, N, spec):
    return cayley_graph(build_tower(p, n, N), spec)


def to_nx(G, vertices=None):
    vs = range(G.order) if vertices is None else vertices
    H = nx.Graph()
    H.add_nodes_from(vs)
    vs = list(vs)
    for i, u in enumerate(vs):
        for v in vs[i + 1:]:
            if G.adjacent(u, v):
                H.add_edge(u, v)
    return H


@pytest.mark.parametrize("p,n,spec", [
    (3, 1, ConnectionSpec.paley()), (5, 1, ConnectionSpec.paley()), (7, 1, ConnectionSpec.peisert()),
    (5, 1, ConnectionSpec.gpaley(3)), (3, 2, ConnectionSpec.gpeisert(10)),
])
def test_omega_matches_networkx(p, n, spec):
    G = graph(p, n, 2, spec)
    res = max_clique(G)
    H = to_nx(G)
    assert res.omega == max(len(c) for c in nx.find_cliques(H))
    assert 0 in res.witness and is_clique(G, res.witness) and len(res.witness) == res.omega


def test_enumeration_matches_networkx_on_p81():
    G = graph(3, 2, 2, ConnectionSpec.paley())
    cliques = enumerate_max_cliques_zero(G, 9)
    assert len(cliques) == 5
    H = to_nx(G)
    ref = {frozenset(c) for c in nx.find_cliques(H) if len(c) == 9 and 0 in c}
    assert {frozenset(C) for C in cliques} == ref
    t = G.tower
    lines = {frozenset(t.scale(s, t.base_field()).tolist()) for s in t.power(np.arange(0, 10, 2))}
    assert {frozenset(C) for C in cliques} == lines


def test_golden_counts():
    G81 = graph(3, 2, 2, ConnectionSpec.gpeisert(10))
    assert len(enumerate_max_cliques_zero(G81, max_clique(G81).omega)) == 9
    G625 = graph(5, 2, 2, ConnectionSpec.gpeisert(26))
    omega = max_clique(G625).omega
    assert omega == 25
    assert len(enumerate_max_cliques_zero(G625, omega)) == 19


def test_symmetry_reduction_is_exact():
    for spec, p, n in [(ConnectionSpec.gpeisert(10), 3, 2), (ConnectionSpec.paley(), 7, 1),
                       (ConnectionSpec.gpaley(4), 11, 1)]:
        G = graph(p, n, 2, spec)
        omega = max_clique(G).omega
        a = enumerate_max_cliques_zero(G, omega)
        b = enumerate_max_cliques_zero(G, omega, use_symmetry=False)
        assert a == b


def test_deterministic_across_workers():
    G = graph(3, 2, 2, ConnectionSpec.gpeisert(10))
    one = enumerate_max_cliques_zero(G, 9, workers=1)
    two = enumerate_max_cliques_zero(G, 9, workers=2)
    assert [C.bits for C in one] == [C.bits for C in two]
    assert max_clique(G).witness == max_clique(G).witness


@pytest.mark.parametrize("p,n,spec", [
    (3, 2, ConnectionSpec.paley()), (7, 1, ConnectionSpec.peisert()), (5, 1, ConnectionSpec.gpeisert(6)),
    (3, 2, ConnectionSpec.gpeisert(10)), (11, 1, ConnectionSpec.gpaley(4)),
])
def test_solution_set_closure(p, n, spec):
    G = graph(p, n, 2, spec)
    t = G.tower
    omega = max_clique(G).omega
    cliques = enumerate_max_cliques_zero(G, omega)
    keys = {C.bits for C in cliques}
    for C in cliques:
        assert classify_structure(C, t).is_additive_subgroup
        arr = C.array()
        for s in t.base_field()[1:]:
            assert VertexSet.of(t.scale(int(s), arr)).bits in keys
        for a in np.random.default_rng(0).integers(0, t.order, 20):
            assert is_clique(G, t.add(int(a), arr))


def test_structure_flags():
    t = build_tower(3, 2, 2)
    F9 = t.base_field()
    f = classify_structure(F9, t)
    assert f.is_subfield and f.is_Fq_coset_line and f.is_additive_subgroup
    line = t.scale(t.power(2), F9)
    f = classify_structure(line, t)
    assert f.is_additive_subgroup and f.is_Fq_coset_line and not f.is_subfield
    with pytest.raises(ZeroMissing):
        classify_structure([1, 2], t)
    f = classify_structure([0, 1, t.power(3)], t)
    assert not f.is_additive_subgroup


@pytest.mark.parametrize("q", [3, 5, 7, 9, 11])
def test_paley_uniqueness(q):
    p, n = {9: (3, 2)}.get(q, (q, 1))
    G = graph(p, n, 2, ConnectionSpec.paley())
    u = unique_01_max_clique(G)
    assert u.unique_subfield and u.omega == q
    assert len(enumerate_max_cliques_zero(G, q)) == (q + 1) // 2


@pytest.mark.parametrize("q,p,n", [(9, 3, 2), (25, 5, 2)])
def test_gpeisert_q_plus_one_violates_uniqueness(q, p, n):
    G = graph(p, n, 2, ConnectionSpec.gpeisert(q + 1))
    u = unique_01_max_clique(G)
    assert not u.unique_subfield and u.violations
    assert len(enumerate_max_cliques_zero(G, u.omega)) > (q + 1) // 2


@pytest.mark.parametrize("p", [3, 5, 7])
def test_gpeisert_q_plus_one_prime_q_is_unique(p):
    G = graph(p, 1, 2, ConnectionSpec.gpeisert(p + 1))
    assert unique_01_max_clique(G).unique_subfield


def test_maximality_examples():
    G = graph(3, 1, 4, ConnectionSpec.peisert())
    F3 = G.tower.base_field()
    res = is_maximal_clique(G, F3)
    assert not res.maximal and is_clique(G, list(F3) + [res.witness])
    ext = find_subspace_extension(G, F3)
    assert ext is not None and len(ext.V) == 9 and is_clique(G, ext.V)
    assert max_clique(G).omega == 9
    G7 = graph(7, 1, 4, ConnectionSpec.peisert())
    assert is_maximal_clique(G7, G7.tower.base_field()).maximal
    assert find_subspace_extension(G7, G7.tower.base_field()) is None
    with pytest.raises(NotAClique):
        is_maximal_clique(G, [0, G.tower.power(2)])


def test_subfield_condition():
    assert subfield_clique_condition(build_tower(11, 1, 3), 7)
    assert subfield_clique_condition(build_tower(13, 1, 3), 3)
    assert not subfield_clique_condition(build_tower(13, 1, 3), 2)
    G = graph(11, 1, 3, ConnectionSpec.gpaley(7))
    assert is_maximal_clique(G, G.tower.base_field()).maximal


def test_stability_p121():
    G = graph(11, 1, 2, ConnectionSpec.paley())
    rep = verify_stability(G)
    assert rep.m == 6
    assert abs(rep.threshold - stability_threshold(11, 6)) < 1e-12
    assert 9.3 < rep.threshold < 9.4 and rep.min_size == 10
    assert rep.verified and len(rep.subspace_cliques) == 6
    assert not rep.hypothesis_holds  # m = (q+1)/2


def test_stability_gp121_3():
    rep = verify_stability(graph(11, 1, 2, ConnectionSpec.gpaley(3)))
    assert rep.hypothesis_holds and rep.m == 4 and rep.verified


def test_timeout_reports_bounds():
    G = graph(7, 1, 4, ConnectionSpec.peisert())
    with pytest.raises(SearchTimeout) as info:
        max_clique(G, budget_s=0.0)
    assert info.value.lower <= info.value.upper


def test_bnb_against_brute_force_oracle():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(5, 40))
        dens = rng.uniform(0.2, 0.8)
        A = np.triu(rng.random((n, n)) < dens, 1)
        A = A | A.T
        nbrs = [set(np.flatnonzero(A[i]).tolist()) for i in range(n)]
        adj = [sum(1 << j for j in s) for s in nbrs]
        H = nx.from_numpy_array(A.astype(int))
        ref = max(len(c) for c in nx.find_cliques(H))
        assert brute_force_clique_number(nbrs) == ref
        assert clique_number_of(adj) == ref


def test_peisert_type_family_examples():
    G = graph(3, 2, 2, ConnectionSpec.peisert_type([0, 1]))
    assert is_peisert_type(G.S).m == 2
    u = unique_01_max_clique(G)
    assert u.omega == 9
