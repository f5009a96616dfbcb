"""Strata algebra: products, projection formula, JSON, integrals in genus 0."""

import itertools
import math
from fractions import Fraction

import pytest

from logchow.errors import ParseError, TypeMismatch
from logchow.stablegraphs import StableGraph, delta, enumerate_graphs, irreducible_graph, moduli_cone_stack
from logchow.stratalgebra import (StrataElem, gluing_pullback, gluing_pushforward, psi_as_boundary,
                                  vertex_decoration)


def integrate_genus0(x: StrataElem) -> Fraction:
    """Degree of a genus-0 class: product over vertices of the ψ integrals
    ∫ ψ^a = (n_v - 3)! / ∏ a_i! on M̄_{0,n_v} (κ not supported)."""
    total = Fraction(0)
    dim = x.n - 3
    for (t, _, d), c in x.sorted_terms():
        G = x.M.graphs[t]
        exps = {}
        for f, e in d:
            assert f[0] == "psi"
            exps[f[1]] = e
        if G.num_edges + sum(exps.values()) != dim:
            continue
        val = Fraction(c)
        for v in range(G.num_vertices):
            hs = G.halfedges_at(v)
            a = [exps.get(h, 0) for h in hs]
            if sum(a) != len(hs) - 3:
                val = 0
                break
            val *= Fraction(math.factorial(len(hs) - 3), math.prod(math.factorial(e) for e in a))
        total += val
    return total


def D(n, *A):
    return StrataElem.stratum(delta(n, set(A)))


def test_divisor_intersections_on_m05():
    assert integrate_genus0(D(5, 1, 2) * D(5, 1, 2)) == -1
    assert integrate_genus0(D(5, 1, 2) * D(5, 3, 4)) == 1
    assert (D(5, 1, 2) * D(5, 1, 3)).is_zero()


def test_psi_integrals():
    for n in range(4, 7):
        for exps in itertools.product(range(n - 2), repeat=n):
            if sum(exps) != n - 3:
                continue
            x = StrataElem.one(0, n)
            for i, e in enumerate(exps):
                if e:
                    x = x * StrataElem.psi(0, n, i + 1, e)
            expected = Fraction(math.factorial(n - 3), math.prod(math.factorial(e) for e in exps))
            assert integrate_genus0(x) == expected


def test_psi_boundary_expression_integrates_correctly():
    psi1 = StrataElem.psi(0, 5, 1)
    assert integrate_genus0(psi1 * psi1) == 1
    for j, k in [(2, 3), (3, 4), (4, 5)]:
        b = psi_as_boundary(5, 1, j, k)
        assert integrate_genus0(b * psi1) == 1
        assert integrate_genus0(b * b) == 1
        for A in [{1, 2}, {3, 4}, {2, 5}]:
            assert integrate_genus0(b * D(5, *A)) == integrate_genus0(psi1 * D(5, *A))


def test_self_intersection_formula():
    G = delta(5, {1, 2})
    a, b = G.edge_halfedges(0)
    expected = StrataElem.stratum(G, ((("psi", a), 1),), -1) + StrataElem.stratum(G, ((("psi", b), 1),), -1)
    assert D(5, 1, 2) * D(5, 1, 2) == expected


def test_irreducible_divisor_squared_in_genus_one():
    G = irreducible_graph(1, 2)
    x = StrataElem.stratum(G)
    sq = x * x
    # [G] is the pushforward along a degree-2 gluing map, hence the factors 4
    banana = StableGraph.make((0, 0), (0, 1), [(0, 1), (0, 1)])
    from logchow.stablegraphs import canonical_form
    banana = canonical_form(banana)
    a, b = G.edge_halfedges(0)
    assert sq - StrataElem.stratum(banana, (), 4) == StrataElem.stratum(G, ((("psi", a), 1),), -4)


def test_products_are_commutative_and_unital():
    M = moduli_cone_stack(1, 2)
    elems = [StrataElem.stratum(G) for G in M.graphs] + [StrataElem.psi(1, 2, 1), StrataElem.kappa(1, 2, 1)]
    one = StrataElem.one(1, 2)
    for x in elems:
        assert x * one == x
        for y in elems:
            assert x * y == y * x


def test_degree_truncation():
    # ψ_1^2 vanishes on M̄_{0,4}
    assert (StrataElem.psi(0, 4, 1) * StrataElem.psi(0, 4, 1)).is_zero()
    assert StrataElem.psi(0, 5, 1, 2).degrees() == {2}


def test_gluing_projection_formula():
    G = delta(5, {1, 2})
    a, _ = G.edge_halfedges(0)
    beta = vertex_decoration(G, ((("psi", a), 1),))
    for alpha in [D(5, 3, 4), D(5, 1, 2), StrataElem.psi(0, 5, 3), D(5, 1, 2, 3)]:
        lhs = gluing_pushforward(gluing_pullback(alpha, G) * beta)
        rhs = alpha * StrataElem.stratum(G, ((("psi", a), 1),))
        assert lhs == rhs


def test_json_round_trip():
    x = D(5, 1, 2).scale(Fraction(3, 2)) + StrataElem.psi(0, 5, 2) * D(5, 3, 4) + StrataElem.kappa(0, 5, 1)
    assert StrataElem.from_json(x.to_json()) == x


def test_json_with_non_canonical_graph_and_labels():
    data = {"g": 0, "n": 5, "terms": [{
        "graph": {"vertices": [{"id": 4, "genus": 0}, {"id": 9, "genus": 0}], "halfedges": {"20": 9, "21": 4},
                  "edges": [[20, 21]], "legs": {"1": 9, "2": 9, "3": 4, "4": 4, "5": 4}},
        "decoration": [{"psi": 20}], "coeff": "2"}]}
    x = StrataElem.from_json(data)
    G = delta(5, {1, 2})
    # half-edge 20 sits on the side of markings 1, 2
    h = next(h for h in G.edge_halfedges(0) if G.vertex_of(h) == G.legs[0])
    assert x == StrataElem.stratum(G, ((("psi", h), 1),), 2)


def test_json_errors():
    with pytest.raises(ParseError):
        StrataElem.from_json({"g": 0})
    with pytest.raises(ParseError):
        StrataElem.from_json({"g": 0, "n": 5, "terms": [{"graph": delta(5, {1, 2}).to_json(),
                                                         "decoration": [{"psi": 99}]}]})
    with pytest.raises(TypeMismatch):
        StrataElem.from_json({"g": 0, "n": 4, "terms": [{"graph": delta(5, {1, 2}).to_json()}]})


def test_type_mismatch_in_arithmetic():
    with pytest.raises(TypeMismatch):
        D(5, 1, 2) + D(4, 1, 2)


def test_all_degree_one_strata_in_m05_have_expected_squares():
    for G in enumerate_graphs(0, 5):
        if G.num_edges == 1:
            x = StrataElem.stratum(G)
            assert integrate_genus0(x * x) == -1
