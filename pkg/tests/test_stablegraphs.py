"""Stable graphs, canonical forms and the tropical moduli stacks."""

import random

import pytest

from graph_oracle import brute_force_aut_order, brute_force_stable_graphs
from logchow.conestack import validate
from logchow.errors import ParseError, TypeMismatch, Unstable
from logchow.stablegraphs import (StableGraph, are_isomorphic, aut_order, canonical_form, canonicalize, contract,
                                  delta, enumerate_graphs, graph_star, irreducible_graph, moduli_cone_stack)

TYPES = [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (2, 0), (0, 6), (1, 3)]


@pytest.mark.parametrize("g,n", TYPES)
def test_counts_match_brute_force(g, n):
    assert len(enumerate_graphs(g, n)) == len(brute_force_stable_graphs(g, n))


@pytest.mark.parametrize("g,n,count", [(0, 4, 4), (0, 5, 26), (1, 1, 2), (1, 2, 5), (2, 0, 7)])
def test_known_counts(g, n, count):
    assert len(enumerate_graphs(g, n)) == count


@pytest.mark.parametrize("g,n", [(0, 5), (1, 2), (2, 0), (1, 3)])
def test_automorphism_orders_match_brute_force(g, n):
    for genera, legs, edges in brute_force_stable_graphs(g, n):
        G = StableGraph.make(genera, legs, edges)
        assert aut_order(G) == brute_force_aut_order(genera, legs, edges)


def test_known_automorphism_orders():
    assert aut_order(irreducible_graph(1, 1)) == 2
    banana = StableGraph.make((0, 0), (0, 1), [(0, 1), (0, 1)])
    assert aut_order(banana) == 2
    assert aut_order(delta(5, {1, 2})) == 1
    double_loop = StableGraph.make((0,), (), [(0, 0), (0, 0)])
    assert aut_order(double_loop) == 8


def random_relabel(G: StableGraph, rng) -> StableGraph:
    perm = list(range(G.num_vertices))
    rng.shuffle(perm)
    edges = [(perm[u], perm[v]) if rng.random() < 0.5 else (perm[v], perm[u]) for u, v in G.edges]
    rng.shuffle(edges)
    genera = [0] * G.num_vertices
    for v, g in enumerate(G.genera):
        genera[perm[v]] = g
    return StableGraph.make(genera, [perm[v] for v in G.legs], edges)


@pytest.mark.parametrize("g,n", [(0, 6), (1, 3), (2, 1)])
def test_canonical_form_is_relabeling_invariant(g, n):
    rng = random.Random(5)
    for G in enumerate_graphs(g, n):
        for _ in range(3):
            H = random_relabel(G, rng)
            assert canonical_form(H) == G
            iso = canonicalize(H)
            # the isomorphism moves vertices and half-edges consistently
            C = iso.graph
            for h in range(H.num_halfedges):
                assert C.vertex_of(iso.hmap[h]) == iso.vmap[H.vertex_of(h)]
                assert iso.hmap[H.partner(h)] == C.partner(iso.hmap[h])


def test_ray_counts_are_boundary_divisor_counts():
    for n in range(4, 8):
        M = moduli_cone_stack(0, n) if n <= 6 else None
        graphs = enumerate_graphs(0, n, max_edges=1)
        assert sum(1 for G in graphs if G.num_edges == 1) == 2 ** (n - 1) - n - 1
        if M is not None:
            assert sum(1 for o in M.objects if o.dim == 1) == 2 ** (n - 1) - n - 1


def test_contract_all_edges_gives_trivial_graph():
    for G in enumerate_graphs(1, 2):
        q, vclass, hpush = contract(G, range(G.num_edges))
        assert q == StableGraph.trivial(1, 2)
        assert len(hpush) == 2


def test_moduli_stack_is_valid():
    for g, n in [(0, 4), (0, 5), (1, 1), (1, 2)]:
        M = moduli_cone_stack(g, n)
        assert validate(M).ok
        assert len(M.objects) == len(enumerate_graphs(g, n))


def test_loop_automorphism_in_moduli_stack():
    M = moduli_cone_stack(1, 1)
    loop = M.index[irreducible_graph(1, 1)]
    assert M.aut_order(loop) == 2  # the loop flip acts trivially on the ray but is a distinct arrow


def test_graph_star_vertex_types():
    G = delta(5, {1, 2})
    st = graph_star(G)
    assert sorted(st.vertex_types) == [(0, 3), (0, 4)]
    assert validate(st.stack).ok
    m = st.to_moduli()
    assert not m.check()


def test_unstable_types_rejected():
    with pytest.raises(Unstable):
        enumerate_graphs(0, 2)
    with pytest.raises(Unstable):
        StableGraph.make((0, 0), (0, 0, 1), [(0, 1)]).check()


def test_type_mismatch():
    with pytest.raises(TypeMismatch):
        moduli_cone_stack(0, 5).object_of(delta(4, {1, 2}))


def test_json_round_trip_and_formats():
    for G in enumerate_graphs(1, 2):
        assert StableGraph.from_json(G.to_json()) == G
    compact = {"genera": [0, 0], "legs": [0, 0, 1, 1, 1], "edges": [[0, 1]]}
    assert StableGraph.from_json(compact) == delta(5, {1, 2})
    # half-edge ids given in the JSON are mapped to internal ids
    data = {"vertices": [{"id": 7, "genus": 0}, {"id": 3, "genus": 0}], "halfedges": {"10": 7, "11": 3},
            "edges": [[11, 10]], "legs": {"1": 7, "2": 7, "3": 3, "4": 3}}
    G, hmap, vmap = StableGraph.from_json_with_map(data)
    assert vmap == {3: 0, 7: 1}
    assert G.vertex_of(hmap[10]) == vmap[7] and G.vertex_of(hmap[11]) == vmap[3]
    with pytest.raises(ParseError):
        StableGraph.from_json({"legs": []})
    with pytest.raises(ParseError):
        StableGraph.from_json({"genera": [0, 0], "legs": [0, 0, 1], "edges": []})


def test_are_isomorphic():
    assert are_isomorphic(delta(5, {1, 2}), delta(5, {3, 4, 5}))
    assert not are_isomorphic(delta(5, {1, 2}), delta(5, {1, 3}))
