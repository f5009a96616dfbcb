"""The strata algebra: kappa/psi decorated strata classes and their product.

Elements live over a base graph ``B`` (default: the one-vertex graph, giving
the strata algebra of the moduli space itself; a general base gives the
tensor product of the vertex strata algebras of ``B``).  A basis element is
a degeneration ``G`` of ``B`` -- an arrow ``phi: sigma_B -> sigma_G`` of the
tropical moduli stack -- with a monomial decoration on ``G``; it is the
pushforward of the decoration along the gluing map of ``G``.  Terms are kept
canonical under automorphisms of ``G``.

A decoration monomial is a sorted tuple of ``(factor, exponent)`` with
factors ``("psi", h)`` for a half-edge ``h`` and ``("kappa", v, a)`` for the
class ``kappa_a`` at a vertex ``v``.  The convention is
``kappa_a = pi_*(psi_{n+1}^{a+1})`` for the forgetful map ``pi``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Mapping

from .conestack import generic_structures
from .errors import ParseError, TypeMismatch
from .stablegraphs import ModuliStack, StableGraph, canonical_form, moduli_cone_stack

Deco = tuple


def deco_mul(a: Deco, b: Deco) -> Deco:
    d = dict(a)
    for f, e in b:
        d[f] = d.get(f, 0) + e
    return tuple(sorted(d.items()))


def deco_degree(d: Deco) -> int:
    return sum(e * (f[2] if f[0] == "kappa" else 1) for f, e in d)


def deco_fits(G: StableGraph, d: Deco) -> bool:
    """Whether the decoration does not exceed any vertex dimension."""
    load = [0] * G.num_vertices
    for f, e in d:
        if f[0] == "psi":
            load[G.vertex_of(f[1])] += e
        else:
            load[f[1]] += e * f[2]
    return all(load[v] <= 3 * g - 3 + G.valence(v) for v, g in enumerate(G.genera))


def deco_poly_mul(p: Mapping, q: Mapping) -> dict:
    out = {}
    for a, x in p.items():
        for b, y in q.items():
            m = deco_mul(a, b)
            out[m] = out.get(m, 0) + x * y
    return {k: v for k, v in out.items() if v}


def pull_deco(M: ModuliStack, arrow: int, d: Deco) -> dict:
    """Pull a decoration back along a contraction arrow.

    ``psi_h`` goes to ``psi`` of the corresponding half-edge and ``kappa_a``
    at a vertex to the sum of ``kappa_a`` over the vertices above it.
    """
    _, _, _, hinj, vsurj = M.arrows[arrow].key
    out = {(): Fraction(1)}
    for f, e in d:
        if f[0] == "psi":
            lin = {((("psi", hinj[f[1]]), 1),): Fraction(1)}
        else:
            lin = {((("kappa", u, f[2]), 1),): Fraction(1) for u, w in enumerate(vsurj) if w == f[1]}
        for _ in range(e):
            out = deco_poly_mul(out, lin)
    return out


def transport_deco(M: ModuliStack, aut: int, d: Deco) -> Deco:
    _, _, _, hinj, vsurj = M.arrows[aut].key
    inv = {w: u for u, w in enumerate(vsurj)}
    out = []
    for f, e in d:
        if f[0] == "psi":
            out.append((("psi", hinj[f[1]]), e))
        else:
            out.append((("kappa", inv[f[1]], f[2]), e))
    return tuple(sorted(out))


def edge_excess(G: StableGraph, edges: Iterable[int]) -> dict:
    """Product of ``-psi_h - psi_h'`` over the given edges."""
    out = {(): Fraction(1)}
    for e in edges:
        a, b = G.edge_halfedges(e)
        out = deco_poly_mul(out, {((("psi", a), 1),): Fraction(-1), ((("psi", b), 1),): Fraction(-1)})
    return out


class StrataElem:
    """Rational combination of decorated strata over a base graph."""

    __slots__ = ("g", "n", "base", "M", "base_obj", "terms")

    def __init__(self, g: int, n: int, terms: Mapping | None = None, base: StableGraph | None = None,
                 canonical: bool = False):
        self.g, self.n = g, n
        self.M = moduli_cone_stack(g, n)
        self.base = canonical_form(base) if base is not None else StableGraph.trivial(g, n)
        if (self.base.genus, self.base.n) != (g, n):
            raise TypeMismatch("base graph has the wrong type")
        self.base_obj = self.M.index[self.base]
        acc = {}
        for key, c in (terms or {}).items():
            c = Fraction(c)
            if not c:
                continue
            t, phi, d = key
            if not deco_fits(self.M.graphs[t], d):
                continue
            if not canonical:
                key = self._canon(t, phi, d)
            acc[key] = acc.get(key, 0) + c
        self.terms = {k: v for k, v in acc.items() if v}

    # ---------------------------------------------------------- builders
    def _canon(self, t: int, phi: int, d: Deco) -> tuple:
        M = self.M
        best = None
        for a in M.aut(t):
            cand = (t, M.compose(phi, a), transport_deco(M, a, d))
            if best is None or cand < best:
                best = cand
        return best

    @classmethod
    def zero(cls, g: int, n: int, base: StableGraph | None = None) -> "StrataElem":
        return cls(g, n, {}, base)

    @classmethod
    def one(cls, g: int, n: int, base: StableGraph | None = None) -> "StrataElem":
        e = cls(g, n, {}, base)
        phi = e.M.identity(e.base_obj)
        return cls(g, n, {(e.base_obj, phi, ()): 1}, base)

    @classmethod
    def stratum(cls, G: StableGraph, deco: Deco = (), coeff=1) -> "StrataElem":
        """``[G, deco]`` in the strata algebra of ``M_{g,n}``; ``deco``
        refers to the half-edges/vertices of the canonical form of ``G``."""
        C = canonical_form(G)
        if C != G and deco:
            raise ParseError("decorations must refer to the canonical form of the graph")
        M = moduli_cone_stack(C.genus, C.n)
        t = M.index[C]
        return cls(C.genus, C.n, {(t, M.arrow_from_trivial(t), tuple(sorted(deco))): coeff})

    @classmethod
    def psi(cls, g: int, n: int, i: int, power: int = 1) -> "StrataElem":
        return cls.stratum(StableGraph.trivial(g, n), ((("psi", i - 1), power),))

    @classmethod
    def kappa(cls, g: int, n: int, a: int, power: int = 1) -> "StrataElem":
        return cls.stratum(StableGraph.trivial(g, n), ((("kappa", 0, a), power),))

    # ------------------------------------------------------------ algebra
    def _check(self, other: "StrataElem") -> None:
        if not isinstance(other, StrataElem) or (other.g, other.n, other.base) != (self.g, self.n, self.base):
            raise TypeMismatch("strata classes of different type or base")

    def _new(self, terms: Mapping, canonical: bool = False) -> "StrataElem":
        return StrataElem(self.g, self.n, terms, self.base, canonical=canonical)

    def __add__(self, other):
        if other == 0:
            return self
        self._check(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return self._new(t, canonical=True)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()}, canonical=True)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "StrataElem":
        c = Fraction(c)
        return self._new({k: v * c for k, v in self.terms.items()}, canonical=True)

    def __mul__(self, other):
        if not isinstance(other, StrataElem):
            return self.scale(other)
        return strata_product(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        return (isinstance(other, StrataElem) and (other.g, other.n, other.base) == (self.g, self.n, self.base)
                and other.terms == self.terms)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def degree_of(self, key) -> int:
        t, _, d = key
        return self.M.graphs[t].num_edges - self.base.num_edges + deco_degree(d)

    def homogeneous_part(self, k: int) -> "StrataElem":
        return self._new({key: v for key, v in self.terms.items() if self.degree_of(key) == k}, canonical=True)

    def degrees(self) -> set:
        return {self.degree_of(k) for k in self.terms}

    def graph_of(self, key) -> StableGraph:
        return self.M.graphs[key[0]]

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda kv: (self.degree_of(kv[0]), kv[0]))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key, c in self.sorted_terms():
            parts.append(f"{c}*{format_term(self.M.graphs[key[0]], key[2])}")
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self) -> dict:
        out = []
        for key, c in self.sorted_terms():
            G = self.M.graphs[key[0]]
            out.append({"graph": G.to_json(), "decoration": deco_to_json(key[2]), "coeff": str(c)})
        return {"g": self.g, "n": self.n, "terms": out}

    @classmethod
    def from_json(cls, data: dict) -> "StrataElem":
        try:
            g, n = int(data["g"]), int(data["n"])
            total = cls.zero(g, n)
            for term in data.get("terms", []):
                G, d = graph_and_deco_from_json(term)
                if (G.genus, G.n) != (g, n):
                    raise TypeMismatch("term graph of the wrong type")
                can, d = transport_to_canonical(G, d)
                total = total + cls.stratum(can, d, Fraction(term.get("coeff", 1)))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed strata class JSON: {exc!r}") from None
        return total


def graph_and_deco_from_json(term: dict) -> tuple:
    """The graph of a JSON term and its decoration in internal ids."""
    G, hmap, vmap = StableGraph.from_json_with_map(term["graph"])
    out = []
    for f, e in deco_from_json(term.get("decoration", [])):
        if f[0] == "psi":
            if f[1] not in hmap:
                raise ParseError(f"unknown half-edge {f[1]}")
            out.append((("psi", hmap[f[1]]), e))
        else:
            if f[1] not in vmap:
                raise ParseError(f"unknown vertex {f[1]}")
            out.append((("kappa", vmap[f[1]], f[2]), e))
    return G, deco_mul((), tuple(out))


def transport_to_canonical(G: StableGraph, d: Deco) -> tuple:
    from .stablegraphs import canonicalize
    iso = canonicalize(G)
    d = tuple(sorted(
        ((("psi", iso.hmap[f[1]]) if f[0] == "psi" else ("kappa", iso.vmap[f[1]], f[2])), e) for f, e in d))
    return canonical_form(G), d


def format_deco(d: Deco) -> str:
    fs = []
    for f, e in d:
        s = f"psi({f[1]})" if f[0] == "psi" else f"kappa({f[1]},{f[2]})"
        fs.append(s if e == 1 else f"{s}^{e}")
    return " ".join(fs) if fs else "1"


def format_term(G: StableGraph, d: Deco) -> str:
    return f"[{G}; {format_deco(d)}]"


def deco_to_json(d: Deco) -> list:
    return [{"psi": f[1], "exp": e} if f[0] == "psi" else {"kappa": [f[1], f[2]], "exp": e} for f, e in d]


def deco_from_json(data: list) -> Deco:
    out = []
    for item in data:
        if "psi" in item:
            out.append((("psi", int(item["psi"])), int(item.get("exp", 1))))
        elif "kappa" in item:
            v, a = item["kappa"]
            out.append((("kappa", int(v), int(a)), int(item.get("exp", 1))))
        else:
            raise ParseError(f"unknown decoration factor {item!r}")
    return tuple(sorted(out))


# ------------------------------------------------------------- products
def strata_product(a: StrataElem, b: StrataElem) -> StrataElem:
    """Product over generic structures with the excess factor
    ``prod (-psi_h - psi_h')`` over edges in both images that do not come
    from the base graph."""
    a._check(b)
    M = a.M
    out = {}
    for (t1, p1, d1), c1 in a.terms.items():
        for (t2, p2, d2), c2 in b.terms.items():
            for s in generic_structures(M, p1, p2):
                G = M.graphs[s.target]
                phi = M.compose(p1, s.phi1)
                im1 = M.image(s.phi1)
                im2 = M.image(s.phi2)
                common = sorted((im1 & im2) - M.image(phi))
                poly = deco_poly_mul(pull_deco(M, s.phi1, d1), pull_deco(M, s.phi2, d2))
                poly = deco_poly_mul(poly, edge_excess(G, common))
                w = c1 * c2 / s.aut_order
                for d, c in poly.items():
                    key = (s.target, phi, d)
                    out[key] = out.get(key, 0) + w * c
    return a._new(out)


def gluing_pullback(elem: StrataElem, G: StableGraph) -> StrataElem:
    """Pullback along the gluing map of ``G``: an element over base ``G``."""
    if elem.base.num_edges:
        raise TypeMismatch("gluing pullback expects an element over the trivial base")
    M = elem.M
    Gc = canonical_form(G)
    res = StrataElem.zero(elem.g, elem.n, Gc)
    fG = M.arrow_from_trivial(res.base_obj)
    out = {}
    for (t1, p1, d1), c1 in elem.terms.items():
        for s in generic_structures(M, fG, p1):
            H = M.graphs[s.target]
            common = sorted(M.image(s.phi1) & M.image(s.phi2))
            poly = deco_poly_mul(pull_deco(M, s.phi2, d1), edge_excess(H, common))
            for d, c in poly.items():
                key = (s.target, s.phi1, d)
                out[key] = out.get(key, 0) + c1 * c / s.aut_order
    return StrataElem(elem.g, elem.n, out, Gc)


def gluing_pushforward(elem: StrataElem) -> StrataElem:
    """Pushforward along the gluing map of the base graph."""
    M = elem.M
    out = {}
    for (t, phi, d), c in elem.terms.items():
        key = (t, M.arrow_from_trivial(t), d)
        out[key] = out.get(key, 0) + c
    return StrataElem(elem.g, elem.n, out)


def vertex_decoration(G: StableGraph, deco: Deco, coeff=1) -> StrataElem:
    """The class of a decoration on the base ``G`` itself (over base ``G``)."""
    Gc = canonical_form(G)
    if Gc != G:
        raise ParseError("vertex decorations must refer to a canonical graph")
    e = StrataElem.zero(G.genus, G.n, G)
    return StrataElem(G.genus, G.n, {(e.base_obj, e.M.identity(e.base_obj), tuple(sorted(deco))): coeff}, G)


def psi_as_boundary(n: int, i: int, j: int, k: int) -> StrataElem:
    """Genus-0 expression of ``psi_i`` as the sum of ``[delta_A]`` over
    ``A`` containing ``i`` and neither ``j`` nor ``k``."""
    if n < 4:
        raise ValueError("psi_as_boundary needs n >= 4")
    if len({i, j, k}) != 3 or not all(1 <= x <= n for x in (i, j, k)):
        raise ValueError("i, j, k must be distinct markings")
    from .stablegraphs import delta
    total = StrataElem.zero(0, n)
    others = [m for m in range(1, n + 1) if m not in (i, j, k)]
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            A = {i, *extra}
            if len(A) >= 2 and n - len(A) >= 2:
                total = total + StrataElem.stratum(delta(n, A))
    return total
