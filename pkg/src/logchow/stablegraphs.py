"""Stable graphs, canonical forms, enumeration and the tropical moduli stacks.

Half-edge numbering convention for a :class:`StableGraph` with ``n`` legs:
half-edges ``0..n-1`` are the legs (half-edge ``i-1`` carries marking ``i``),
and edge ``k = (u, v)`` (with ``u <= v``) owns half-edges ``n+2k`` (at ``u``)
and ``n+2k+1`` (at ``v``).  Edges are kept sorted, so a graph is determined
by its vertex genera, the vertex of every leg and its sorted edge list.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .conestack import (
    Arrow,
    ConeStack,
    ConeStackWithBoundary,
    StackMorphism,
    StackObject,
    faces_stack,
    generic_structures,
    product_stack,
)
from .errors import ParseError, TypeMismatch, Unstable


@dataclass(frozen=True)
class StableGraph:
    genera: tuple
    legs: tuple
    edges: tuple

    # ----------------------------------------------------------- basics
    @classmethod
    def make(cls, genera: Sequence[int], legs: Sequence[int], edges: Iterable) -> "StableGraph":
        es = tuple(sorted((min(u, v), max(u, v)) for u, v in edges))
        return cls(tuple(genera), tuple(legs), es)

    @classmethod
    def trivial(cls, g: int, n: int) -> "StableGraph":
        return cls((g,), (0,) * n, ())

    @property
    def n(self) -> int:
        return len(self.legs)

    @property
    def num_vertices(self) -> int:
        return len(self.genera)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_halfedges(self) -> int:
        return self.n + 2 * self.num_edges

    @property
    def genus(self) -> int:
        return sum(self.genera) + self.num_edges - self.num_vertices + 1

    def vertex_of(self, h: int) -> int:
        n = self.n
        if h < n:
            return self.legs[h]
        k, side = divmod(h - n, 2)
        return self.edges[k][side]

    def partner(self, h: int) -> int:
        if h < self.n:
            return h
        return h + 1 if (h - self.n) % 2 == 0 else h - 1

    def edge_of(self, h: int) -> int:
        return (h - self.n) // 2

    def edge_halfedges(self, k: int) -> tuple:
        return (self.n + 2 * k, self.n + 2 * k + 1)

    def halfedges_at(self, v: int) -> tuple:
        return tuple(h for h in range(self.num_halfedges) if self.vertex_of(h) == v)

    def valence(self, v: int) -> int:
        return len(self.halfedges_at(v))

    def is_connected(self) -> bool:
        if not self.genera:
            return False
        seen = {0}
        stack = [0]
        adj = {v: set() for v in range(self.num_vertices)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == self.num_vertices

    def is_stable(self) -> bool:
        return all(2 * g - 2 + self.valence(v) > 0 for v, g in enumerate(self.genera))

    def check(self) -> None:
        if not self.is_connected():
            raise ParseError("stable graph must be connected")
        if not self.is_stable():
            raise Unstable("a vertex violates 2g(v)-2+n(v) > 0")

    def vertex_type(self, v: int) -> tuple:
        return (self.genera[v], self.valence(v))

    def __str__(self) -> str:
        legs = " ".join(f"{i + 1}@{v}" for i, v in enumerate(self.legs))
        edges = ",".join(f"{u}-{v}" for u, v in self.edges)
        return f"[g={list(self.genera)}; legs {legs or '-'}; edges {edges or '-'}]"

    # ------------------------------------------------------------- JSON
    def to_json(self) -> dict:
        n = self.n
        return {
            "vertices": [{"id": v, "genus": g} for v, g in enumerate(self.genera)],
            "halfedges": {str(h): self.vertex_of(h) for h in range(n, self.num_halfedges)},
            "edges": [[n + 2 * k, n + 2 * k + 1] for k in range(self.num_edges)],
            "legs": {str(i + 1): v for i, v in enumerate(self.legs)},
        }

    @classmethod
    def from_json(cls, data: dict) -> "StableGraph":
        return cls.from_json_with_map(data)[0]

    @classmethod
    def from_json_with_map(cls, data: dict) -> tuple:
        """Parse a graph; also return the map from the half-edge ids used in
        the JSON to internal half-edge indices (legs are ``0..n-1``) and the
        map from JSON vertex ids to vertex indices.

        Two layouts are accepted: ``{"vertices": [{"id", "genus"}], "legs":
        {marking: vertex}, "edges": [[h, h'], ...], "halfedges": {h: vertex}}``
        (``halfedges`` optional; without it edges are vertex pairs) and the
        compact ``{"genera": [...], "legs": [vertex of marking 1, ...],
        "edges": [[u, v], ...]}``.
        """
        try:
            if "genera" in data:
                genera = [int(x) for x in data["genera"]]
                vindex = {i: i for i in range(len(genera))}
                legs = [vindex[int(v)] for v in data.get("legs", [])]
                he = None
            else:
                verts = sorted(data["vertices"], key=lambda x: x["id"])
                ids = [x["id"] for x in verts]
                vindex = {vid: i for i, vid in enumerate(ids)}
                genera = [int(x["genus"]) for x in verts]
                legs_d = {int(k): vindex[v] for k, v in data.get("legs", {}).items()}
                n = len(legs_d)
                if sorted(legs_d) != list(range(1, n + 1)):
                    raise ParseError("legs must be labelled 1..n")
                legs = [legs_d[i + 1] for i in range(n)]
                he = data.get("halfedges")
            labelled = []
            for k, pair in enumerate(data.get("edges", [])):
                a, b = pair
                if he is not None:
                    labelled.append((int(a), vindex[he[str(a)]], int(b), vindex[he[str(b)]]))
                else:
                    labelled.append((("e", k, 0), vindex[a], ("e", k, 1), vindex[b]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed stable graph JSON: {exc}") from None
        if any(not 0 <= v < len(genera) for v in legs):
            raise ParseError("leg attached to an unknown vertex")
        graph, lab = assemble(genera, legs, labelled)
        graph.check()
        hmap = {i: i for i in range(graph.n)}
        for key, h in lab.items():
            if isinstance(key, int):
                if key < graph.n:
                    raise ParseError("edge half-edge ids must be >= n")
                hmap[key] = h
        return graph, hmap, dict(vindex)


# --------------------------------------------------------------- builders
def assemble(genera: Sequence[int], legs: Sequence[int], edges: Sequence[tuple]) -> tuple:
    """Build a graph from labelled half-edges.

    ``edges`` are ``(label_a, vertex_a, label_b, vertex_b)``.  Returns the
    graph and a map ``label -> half-edge id`` (legs keep ids ``0..n-1``).
    """
    n = len(legs)
    normalized = []
    for la, va, lb, vb in edges:
        if va > vb:
            la, va, lb, vb = lb, vb, la, va
        normalized.append((va, vb, la, lb))
    order = sorted(range(len(normalized)), key=lambda i: (normalized[i][0], normalized[i][1]))
    hmap = {}
    es = []
    for k, i in enumerate(order):
        va, vb, la, lb = normalized[i]
        es.append((va, vb))
        hmap[la] = n + 2 * k
        hmap[lb] = n + 2 * k + 1
    return StableGraph(tuple(genera), tuple(legs), tuple(es)), hmap


def contract(graph: StableGraph, S: Iterable[int]) -> tuple:
    """Contract the edge set ``S``.

    Returns ``(quotient, vclass, hpush)`` with ``vclass[v]`` the quotient
    vertex of ``v`` and ``hpush`` mapping quotient half-edges to the
    original ones.
    """
    S = set(S)
    parent = list(range(graph.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k in S:
        u, v = graph.edges[k]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    roots = sorted({find(v) for v in range(graph.num_vertices)})
    rindex = {r: i for i, r in enumerate(roots)}
    vclass = tuple(rindex[find(v)] for v in range(graph.num_vertices))
    genera = [0] * len(roots)
    counts = [0] * len(roots)
    for v, g in enumerate(graph.genera):
        genera[vclass[v]] += g
        counts[vclass[v]] += 1
    for k in S:
        genera[vclass[graph.edges[k][0]]] += 1
    for c in range(len(roots)):
        genera[c] -= counts[c] - 1
    legs = [vclass[v] for v in graph.legs]
    keep = []
    for k, (u, v) in enumerate(graph.edges):
        if k not in S:
            ha, hb = graph.edge_halfedges(k)
            keep.append((ha, vclass[u], hb, vclass[v]))
    q, hmap = assemble(genera, legs, keep)
    hpush = {i: i for i in range(graph.n)}
    for lab, h in hmap.items():
        hpush[h] = lab
    return q, vclass, tuple(hpush[h] for h in range(q.num_halfedges))


# ------------------------------------------------------------ canonical form
def _relabel(graph: StableGraph, perm: Sequence[int]) -> tuple:
    """Encoding of the graph after renaming vertex ``v`` to ``perm[v]``."""
    genera = [0] * len(perm)
    for v, g in enumerate(graph.genera):
        genera[perm[v]] = g
    legs = tuple(perm[v] for v in graph.legs)
    edges = tuple(sorted((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in graph.edges))
    return (tuple(genera), legs, edges)


def _refined_colors(graph: StableGraph) -> list:
    nv = graph.num_vertices
    legs_at = [[] for _ in range(nv)]
    for i, v in enumerate(graph.legs):
        legs_at[v].append(i)
    loops = [0] * nv
    nbrs = [dict() for _ in range(nv)]
    for u, v in graph.edges:
        if u == v:
            loops[u] += 1
        else:
            nbrs[u][v] = nbrs[u].get(v, 0) + 1
            nbrs[v][u] = nbrs[v].get(u, 0) + 1
    sig = [(graph.genera[v], tuple(legs_at[v]), loops[v], graph.valence(v)) for v in range(nv)]
    ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
    colors = [ranks[s] for s in sig]
    while True:
        sig = [(colors[v], tuple(sorted((colors[w], m) for w, m in nbrs[v].items()))) for v in range(nv)]
        ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def _candidate_perms(colors: Sequence[int]):
    """Vertex relabelings sending colour classes to consecutive blocks."""
    classes = {}
    for v, c in enumerate(colors):
        classes.setdefault(c, []).append(v)
    keys = sorted(classes)
    offsets = {}
    off = 0
    for c in keys:
        offsets[c] = off
        off += len(classes[c])
    blocks = [list(itertools.permutations(classes[c])) for c in keys]
    for choice in itertools.product(*blocks):
        perm = [0] * len(colors)
        for c, order in zip(keys, choice):
            for pos, v in enumerate(order):
                perm[v] = offsets[c] + pos
        yield perm


def _iso_hmaps(G: StableGraph, H: StableGraph, perm: Sequence[int]):
    """All half-edge bijections realizing a graph isomorphism with vertex
    map ``perm``."""
    n = G.n
    if G.n != H.n or G.num_edges != H.num_edges:
        return
    for i in range(n):
        if perm[G.legs[i]] != H.legs[i]:
            return
    groups = {}
    for k, (u, v) in enumerate(G.edges):
        a, b = perm[u], perm[v]
        groups.setdefault((min(a, b), max(a, b)), []).append(k)
    targets = {}
    for m, (a, b) in enumerate(H.edges):
        targets.setdefault((a, b), []).append(m)
    if {k: len(v) for k, v in groups.items()} != {k: len(v) for k, v in targets.items()}:
        return
    keys = sorted(groups)
    per_group = []
    for key in keys:
        src = groups[key]
        dst = targets[key]
        options = []
        for p in itertools.permutations(dst):
            flips = []
            for k, m in zip(src, p):
                u = G.edges[k][0]
                a, b = H.edges[m]
                if a == b:
                    flips.append([(n + 2 * k, n + 2 * m, n + 2 * k + 1, n + 2 * m + 1),
                                  (n + 2 * k, n + 2 * m + 1, n + 2 * k + 1, n + 2 * m)])
                elif perm[u] == a:
                    flips.append([(n + 2 * k, n + 2 * m, n + 2 * k + 1, n + 2 * m + 1)])
                else:
                    flips.append([(n + 2 * k, n + 2 * m + 1, n + 2 * k + 1, n + 2 * m)])
            for combo in itertools.product(*flips):
                options.append(combo)
        per_group.append(options)
    for combo in itertools.product(*per_group):
        hmap = list(range(G.num_halfedges))
        for group in combo:
            for s1, t1, s2, t2 in group:
                hmap[s1] = t1
                hmap[s2] = t2
        yield tuple(hmap)


@dataclass(frozen=True)
class Canonical:
    graph: StableGraph
    vmap: tuple
    hmap: tuple
    automorphisms: tuple

    @property
    def aut_order(self) -> int:
        return len(self.automorphisms)


@functools.lru_cache(maxsize=None)
def canonicalize(graph: StableGraph) -> Canonical:
    """Canonical representative, an isomorphism onto it, and all
    automorphisms of the representative as ``(vmap, hmap)`` pairs."""
    colors = _refined_colors(graph)
    best = None
    best_perm = None
    for perm in _candidate_perms(colors):
        enc = _relabel(graph, perm)
        if best is None or enc < best:
            best, best_perm = enc, perm
    canon = StableGraph(*best)
    hmap = next(_iso_hmaps(graph, canon, best_perm))
    auts = []
    ccolors = _refined_colors(canon)
    for perm in _candidate_perms(ccolors):
        if _relabel(canon, perm) == best:
            for h in _iso_hmaps(canon, canon, perm):
                auts.append((tuple(perm), h))
    auts.sort(key=lambda a: (a[0] != tuple(range(canon.num_vertices)) or a[1] != tuple(range(canon.num_halfedges)), a))
    return Canonical(canon, tuple(best_perm), hmap, tuple(auts))


def canonical_form(graph: StableGraph) -> StableGraph:
    return canonicalize(graph).graph


def aut_order(graph: StableGraph) -> int:
    return canonicalize(canonical_form(graph)).aut_order


def are_isomorphic(a: StableGraph, b: StableGraph) -> bool:
    return canonical_form(a) == canonical_form(b)


# -------------------------------------------------------------- enumeration
def _check_type(g: int, n: int) -> None:
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise Unstable(f"(g, n) = ({g}, {n}) is not stable")


def _splittings(graph: StableGraph):
    """All graphs obtained by inserting one edge at a vertex."""
    n = graph.n
    for v in range(graph.num_vertices):
        g = graph.genera[v]
        hs = graph.halfedges_at(v)
        if g >= 1:
            genera = list(graph.genera)
            genera[v] = g - 1
            yield StableGraph.make(genera, graph.legs, list(graph.edges) + [(v, v)])
        new = graph.num_vertices
        for mask in range(1 << len(hs)):
            side = {h for i, h in enumerate(hs) if mask >> i & 1}
            for g1 in range(g + 1):
                g2 = g - g1
                if 2 * g1 - 2 + len(hs) - len(side) + 1 <= 0 or 2 * g2 - 2 + len(side) + 1 <= 0:
                    continue
                genera = list(graph.genera) + [g2]
                genera[v] = g1

                def where(h):
                    return new if h in side else graph.vertex_of(h)

                legs = [where(h) for h in range(n)]
                edges = []
                for k in range(graph.num_edges):
                    a, b = graph.edge_halfedges(k)
                    edges.append((where(a), where(b)))
                edges.append((v, new))
                yield StableGraph.make(genera, legs, edges)


@functools.lru_cache(maxsize=None)
def enumerate_graphs(g: int, n: int, max_edges: int | None = None) -> tuple:
    """All stable graphs of type ``(g, n)`` up to isomorphism, in canonical
    form, sorted by ``(edge count, encoding)``."""
    _check_type(g, n)
    top = 3 * g - 3 + n
    if max_edges is not None:
        top = min(top, max_edges)
    layer = {canonical_form(StableGraph.trivial(g, n))}
    out = list(layer)
    for _ in range(top):
        nxt = set()
        for G in layer:
            for H in _splittings(G):
                nxt.add(canonical_form(H))
        out.extend(sorted(nxt, key=_graph_key))
        layer = nxt
    return tuple(sorted(out, key=_graph_key))


def _graph_key(G: StableGraph):
    return (G.num_edges, G.genera, G.legs, G.edges)


def delta(n: int, A: Iterable[int], g: int = 0) -> StableGraph:
    """Canonical one-edge genus-0-style separating graph with markings
    ``A`` on one side (genus ``g`` split as ``(0, g)``)."""
    A = set(A)
    legs = [0 if (i + 1) in A else 1 for i in range(n)]
    G = StableGraph.make((0, g), legs, [(0, 1)])
    G.check()
    return canonical_form(G)


def irreducible_graph(g: int, n: int) -> StableGraph:
    G = StableGraph.make((g - 1,), (0,) * n, [(0, 0)])
    G.check()
    return canonical_form(G)


# ---------------------------------------------------------------- Σ_{g,n}
class ModuliStack(ConeStack):
    """The tropical moduli cone stack of stable graphs of type ``(g, n)``.

    The arrow ``sigma_G -> sigma_G'`` with key ``("gc", a, b, hinj, vsurj)``
    encodes a contraction ``G' -> G`` by the injection of half-edges
    ``hinj: H(G) -> H(G')`` and the vertex surjection ``vsurj: V(G') -> V(G)``.
    """

    def __init__(self, g: int, n: int):
        _check_type(g, n)
        self.g, self.n = g, n
        graphs = enumerate_graphs(g, n)
        self.graphs = graphs
        self.index = {G: i for i, G in enumerate(graphs)}
        objects = [StackObject(str(G), tuple(f"e{k}" for k in range(G.num_edges)), data=G) for G in graphs]
        arrows = []
        for b, Gb in enumerate(graphs):
            for r in range(Gb.num_edges + 1):
                for S in itertools.combinations(range(Gb.num_edges), r):
                    q, vclass, hpush = contract(Gb, S)
                    can = canonicalize(q)
                    a = self.index[can.graph]
                    ih = _invert(can.hmap)
                    C = can.graph
                    for av, ah in can.automorphisms:
                        hinj = tuple(hpush[ih[ah[c]]] for c in range(C.num_halfedges))
                        av_inv = _invert(av)
                        vsurj = tuple(av_inv[can.vmap[vclass[u]]] for u in range(Gb.num_vertices))
                        rm = tuple(Gb.edge_of(hinj[C.n + 2 * k]) for k in range(C.num_edges))
                        arrows.append(Arrow(a, b, rm, ("gc", a, b, hinj, vsurj)))
        super().__init__(objects, arrows, composer=_compose_contractions, name=f"Sigma_{g},{n}")

    def graph(self, o: int) -> StableGraph:
        return self.graphs[o]

    def object_of(self, G: StableGraph) -> int:
        C = canonical_form(G)
        if C.genus != self.g or C.n != self.n:
            raise TypeMismatch(f"graph of type ({C.genus},{C.n}) in Sigma_{self.g},{self.n}")
        return self.index[C]

    def contraction(self, arrow: int) -> tuple:
        k = self.arrows[arrow].key
        return k[3], k[4]

    def arrow_from_trivial(self, o: int) -> int:
        return self.homs(0, o)[0]


def _compose_contractions(stack, f: Arrow, g: Arrow):
    _, a, _, hf, vf = f.key
    _, _, c, hg, vg = g.key
    return ("gc", a, c, tuple(hg[h] for h in hf), tuple(vf[v] for v in vg))


def _invert(seq: Sequence[int]) -> tuple:
    out = [0] * len(seq)
    for i, x in enumerate(seq):
        out[x] = i
    return tuple(out)


@functools.lru_cache(maxsize=None)
def moduli_cone_stack(g: int, n: int) -> ModuliStack:
    return ModuliStack(g, n)


def generic_graph_structures(G1: StableGraph, G2: StableGraph) -> list:
    """Generic structures of two graphs over the trivial graph, as
    ``(G', arrow from G1, arrow from G2, stabilizer order)`` in Σ_{g,n}."""
    if (G1.genus, G1.n) != (G2.genus, G2.n):
        raise TypeMismatch("graphs of different type")
    M = moduli_cone_stack(G1.genus, G1.n)
    a, b = M.object_of(G1), M.object_of(G2)
    f1, f2 = M.arrow_from_trivial(a), M.arrow_from_trivial(b)
    return [(M.graphs[s.target], s.phi1, s.phi2, s.aut_order) for s in generic_structures(M, f1, f2)]


# ------------------------------------------------------------- graph stars
class GraphStar:
    """The star cone stack of a stable graph ``G`` of type ``(g, n)``.

    It is the product of the vertex moduli stacks ``Σ_{g(v), n(v)}`` and the
    faces of the edge orthant of ``G``; local marking ``i`` of vertex ``v``
    is the ``i``-th half-edge at ``v``.  Ray names are ``v<k>.e<j>`` for
    vertex edges and ``l<e>`` for the edge lengths of ``G``.  The interior
    consists of the objects whose edge-length factor is the full orthant.
    """

    def __init__(self, G: StableGraph):
        G.check()
        self.graph = G
        self.g, self.n = G.genus, G.n
        self.vertex_halfedges = tuple(G.halfedges_at(v) for v in range(G.num_vertices))
        self.vertex_types = tuple((G.genera[v], len(hs)) for v, hs in enumerate(self.vertex_halfedges))
        self.local_marking = {}
        for v, hs in enumerate(self.vertex_halfedges):
            for i, h in enumerate(hs):
                self.local_marking[h] = (v, i)
        self.factors = tuple(moduli_cone_stack(*t) for t in self.vertex_types)
        self.edge_names = tuple(f"l{e}" for e in range(G.num_edges))
        self.faces = faces_stack(self.edge_names)
        fst = self.faces.stack
        self.face_index = {frozenset(int(r[1:]) for r in o.rays): i for i, o in enumerate(fst.objects)}
        prefixes = [f"v{v}." for v in range(G.num_vertices)] + [""]
        self.stack = product_stack(list(self.factors) + [fst], prefixes, name=f"Star{G}")
        self.obj_index = {o.data: i for i, o in enumerate(self.stack.objects)}
        full = self.face_index[frozenset(range(G.num_edges))]
        interior = [i for i, o in enumerate(self.stack.objects) if o.data[-1] == full]
        self.bounded = ConeStackWithBoundary(self.stack, interior)
        self._to_moduli = None

    def parts(self, o: int) -> tuple:
        data = self.stack.objects[o].data
        T = frozenset(int(r[1:]) for r in self.faces.stack.objects[data[-1]].rays)
        return data[:-1], T

    def object_for(self, local: Sequence[int], T: Iterable[int]) -> int:
        return self.obj_index[tuple(local) + (self.face_index[frozenset(T)],)]

    def edge_var(self, e: int) -> str:
        return self.edge_names[e]

    def vertex_var(self, v: int, o: int, k: int) -> str:
        return f"v{v}.e{k}"

    @property
    def top_trivial(self) -> int:
        """The interior object with all vertex factors trivial."""
        return self.object_for([0] * self.graph.num_vertices, range(self.graph.num_edges))

    def ray_slots(self, o: int) -> list:
        """Description of each ray of object ``o``: ``("v", v, k)`` for edge
        ``k`` of the vertex-``v`` graph or ``("l", e)`` for an edge length."""
        local, T = self.parts(o)
        out = []
        for v, lo in enumerate(local):
            out.extend(("v", v, k) for k in range(self.factors[v].objects[lo].dim))
        out.extend(("l", e) for e in sorted(T))
        return out

    # ------------------------------------------------------------ gluing
    def glue(self, o: int, target: StableGraph | None = None, hinj=None, vsurj=None) -> list:
        """Glue the local graphs of object ``o`` over the fibers of a
        contraction ``G -> target`` (default: onto the one-vertex graph).

        Returns, for each vertex ``w`` of ``target``, a tuple
        ``(canonical local graph, label->half-edge map, label-of-vertex map,
        slot->edge map)`` where slots are those of :meth:`ray_slots` that
        land in the fiber over ``w``.
        """
        G = self.graph
        if target is None:
            target = StableGraph.trivial(self.g, self.n)
            hinj = tuple(range(self.n))
            vsurj = (0,) * G.num_vertices
        local, T = self.parts(o)
        locals_ = [self.factors[v].graphs[lo] for v, lo in enumerate(local)]
        image_edges = {G.edge_of(hinj[target.n + 2 * k]) for k in range(target.num_edges)}
        S = set(range(G.num_edges)) - image_edges
        results = []
        for w in range(target.num_vertices):
            U = [u for u in range(G.num_vertices) if vsurj[u] == w]
            vlabels = []
            vindex = {}
            genera = []
            for u in U:
                for x in range(locals_[u].num_vertices):
                    vindex[(u, x)] = len(vlabels)
                    vlabels.append((u, x))
                    genera.append(locals_[u].genera[x])

            def local_leg_vertex(h):
                u, i = self.local_marking[h]
                return vindex[(u, locals_[u].legs[i])]

            wh = target.halfedges_at(w)
            legs = [local_leg_vertex(hinj[h]) for h in wh]
            edges = []
            for u in U:
                L = locals_[u]
                for k in range(L.num_edges):
                    a, b = L.edge_halfedges(k)
                    edges.append((("L", u, a), vindex[(u, L.vertex_of(a))], ("L", u, b), vindex[(u, L.vertex_of(b))]))
            fiber_S = sorted(e for e in S if vsurj[G.edges[e][0]] == w)
            for e in fiber_S:
                a, b = G.edge_halfedges(e)
                edges.append((("G", a), local_leg_vertex(a), ("G", b), local_leg_vertex(b)))
            raw, lab = assemble(genera, legs, edges)
            drop = [raw.edge_of(lab[("G", G.edge_halfedges(e)[0])]) for e in fiber_S if e not in T]
            q, vclass, hpush = contract(raw, drop)
            can = canonicalize(q)
            back = {h_raw: h_q for h_q, h_raw in enumerate(hpush)}
            label_map = {}
            for key, h_raw in lab.items():
                if h_raw in back:
                    label_map[key] = can.hmap[back[h_raw]]
            vertex_map = {vl: can.vmap[vclass[i]] for i, vl in enumerate(vlabels)}
            slot_map = {}
            for u in U:
                L = locals_[u]
                for k in range(L.num_edges):
                    slot_map[("v", u, k)] = can.graph.edge_of(label_map[("L", u, L.edge_halfedges(k)[0])])
            for e in fiber_S:
                if e in T:
                    slot_map[("l", e)] = can.graph.edge_of(label_map[("G", G.edge_halfedges(e)[0])])
            results.append((can.graph, label_map, vertex_map, slot_map))
        return results

    def to_moduli(self, with_arrows: bool = True) -> StackMorphism:
        """The gluing morphism to Σ_{g,n}."""
        if self._to_moduli is not None and (self._to_moduli.arrow_map is not None or not with_arrows):
            return self._to_moduli
        M = moduli_cone_stack(self.g, self.n)
        glued = [self.glue(o)[0] for o in range(len(self.stack.objects))]
        omap = []
        lattice = []
        for o, (C, _, _, slots) in enumerate(glued):
            t = M.index[C]
            omap.append(t)
            dim = C.num_edges
            lattice.append(tuple(tuple(int(j == slots[s]) for j in range(dim)) for s in self.ray_slots(o)))
        amap = None
        if with_arrows:
            amap = tuple(self._glued_arrow(M, glued, a, 0) for a in range(len(self.stack.arrows)))
        self._to_moduli = StackMorphism(self.stack, M, tuple(omap), tuple(lattice), amap)
        return self._to_moduli

    def _local_arrow_maps(self, a: int) -> tuple:
        key = self.stack.arrows[a].key
        hmaps, vmaps = [], []
        for v, f in enumerate(key[1:-1]):
            _, _, _, hinj, vsurj = self.factors[v].arrows[f].key
            hmaps.append(hinj)
            vmaps.append(vsurj)
        return hmaps, vmaps

    def _glued_arrow(self, M: ModuliStack, glued: list, a: int, w: int) -> int:
        ar = self.stack.arrows[a]
        C1, lab1, vm1, _ = glued[ar.src]
        C2, lab2, vm2, _ = glued[ar.dst]
        hmaps, vmaps = self._local_arrow_maps(a)
        inv1 = {h: key for key, h in lab1.items()}
        hinj = []
        for h in range(C1.num_halfedges):
            if h < C1.n:
                hinj.append(h)
                continue
            key = inv1[h]
            if key[0] == "L":
                key = ("L", key[1], hmaps[key[1]][key[2]])
            hinj.append(lab2[key])
        rep2 = {}
        for (u, x), c in vm2.items():
            rep2.setdefault(c, (u, x))
        vsurj = []
        for c in range(C2.num_vertices):
            u, x = rep2[c]
            vsurj.append(vm1[(u, vmaps[u][x])])
        return M.arrow_index(("gc", M.index[C1], M.index[C2], tuple(hinj), tuple(vsurj)))

    def contraction_morphism(self, other: "GraphStar", hinj: Sequence[int], vsurj: Sequence[int]) -> StackMorphism:
        """Morphism ``Star(self.graph) -> Star(other.graph)`` induced by a
        contraction ``self.graph -> other.graph`` given by ``(hinj, vsurj)``."""
        T_graph = other.graph
        image_edges = {self.graph.edge_of(hinj[T_graph.n + 2 * k]): k for k in range(T_graph.num_edges)}
        omap = []
        lattice = []
        for o in range(len(self.stack.objects)):
            parts = self.glue(o, T_graph, hinj, vsurj)
            local_t = []
            slot_target = {}
            for w, (C, _, _, slots) in enumerate(parts):
                local_t.append(other.factors[w].index[C])
                for s, e in slots.items():
                    slot_target[s] = ("v", w, e)
            _, T = self.parts(o)
            T2 = sorted(image_edges[e] for e in T if e in image_edges)
            for e in T:
                if e in image_edges:
                    slot_target[("l", e)] = ("l", image_edges[e])
            t = other.object_for(local_t, T2)
            tslots = {s: i for i, s in enumerate(other.ray_slots(t))}
            dim = len(tslots)
            omap.append(t)
            lattice.append(tuple(tuple(int(j == tslots[slot_target[s]]) for j in range(dim))
                                 for s in self.ray_slots(o)))
        return StackMorphism(self.stack, other.stack, tuple(omap), tuple(lattice), None)


@functools.lru_cache(maxsize=None)
def graph_star(G: StableGraph) -> GraphStar:
    return GraphStar(canonical_form(G))
