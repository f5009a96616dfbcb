"""Brute-force enumeration of stable graphs with networkx isomorphism.

Independent of the library: all connected multigraphs with loops, genus
labels and markings are listed and deduplicated with networkx's multigraph
isomorphism test.
"""

import itertools

import networkx as nx
from networkx.algorithms.isomorphism import categorical_node_match


def _multisets(pairs, k):
    return itertools.combinations_with_replacement(pairs, k)


def _to_nx(genera, legs, edges):
    G = nx.MultiGraph()
    for v, g in enumerate(genera):
        G.add_node(v, label=(g, tuple(sorted(i for i, w in enumerate(legs) if w == v))))
    G.add_edges_from(edges)
    return G


def brute_force_stable_graphs(g: int, n: int) -> list:
    """Isomorphism classes as ``(genera, legs, edges)`` triples."""
    found = []
    buckets = {}
    max_v = 2 * g - 2 + n
    max_e = 3 * g - 3 + n
    for V in range(1, max_v + 1):
        pairs = [(i, j) for i in range(V) for j in range(i, V)]
        for E in range(V - 1, max_e + 1):
            h1 = E - V + 1
            if h1 > g:
                continue
            for edges in _multisets(pairs, E):
                adj = nx.MultiGraph()
                adj.add_nodes_from(range(V))
                adj.add_edges_from(edges)
                if not nx.is_connected(adj):
                    continue
                val = [0] * V
                for a, b in edges:
                    val[a] += 1
                    val[b] += 1
                for genera in itertools.product(range(g - h1 + 1), repeat=V):
                    if sum(genera) != g - h1:
                        continue
                    for legs in itertools.product(range(V), repeat=n):
                        ok = all(2 * genera[v] - 2 + val[v] + legs.count(v) > 0 for v in range(V))
                        if not ok:
                            continue
                        cand = _to_nx(genera, legs, edges)
                        key = (V, E, tuple(sorted(d["label"] for _, d in cand.nodes(data=True))),
                               tuple(sorted(d for _, d in cand.degree())))
                        bucket = buckets.setdefault(key, [])
                        if any(nx.is_isomorphic(cand, other, node_match=categorical_node_match("label", None))
                               for other in bucket):
                            continue
                        bucket.append(cand)
                        found.append((genera, legs, edges))
    return found


def brute_force_aut_order(genera, legs, edges) -> int:
    """Automorphisms of the half-edge structure, by exhaustive search."""
    n = len(legs)
    halves = []  # (vertex, edge index)
    for k, (a, b) in enumerate(edges):
        halves.append((a, k))
        halves.append((b, k))
    V = len(genera)
    count = 0
    for vperm in itertools.permutations(range(V)):
        if any(genera[vperm[v]] != genera[v] for v in range(V)):
            continue
        if any(vperm[legs[i]] != legs[i] for i in range(n)):
            continue
        for hperm in itertools.permutations(range(len(halves))):
            good = True
            for i, (v, k) in enumerate(halves):
                if halves[hperm[i]][0] != vperm[v]:
                    good = False
                    break
                partner = i ^ 1
                if hperm[partner] != hperm[i] ^ 1:
                    good = False
                    break
            if good:
                count += 1
    return count
