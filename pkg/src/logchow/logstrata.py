"""Decorated log strata classes ``[G, f, gamma]`` and the log strata algebra.

``f`` is a homological piecewise polynomial on the star of ``sigma_G`` (a
class on a subdivision of :class:`~logchow.stablegraphs.GraphStar`) and
``gamma`` a kappa/psi monomial on ``G``.  The classical decorated stratum
``[G, gamma]`` corresponds to ``[G, F_G, gamma]`` with ``F_G`` the product
of the edge lengths.

Elements are stored in a normal form: every term whose ``f`` is strict on
the star is divided by ``F_G`` and the quotient is converted into classical
strata through the module structure (an edge length ``l_e`` or a vertex-fan
coordinate becomes ``-psi_h - psi_h'`` on the corresponding edge; a
monomial with full support on a star object becomes the stratum of the
glued graph, weighted by the inverse order of the object's automorphism
group).  Genuinely non-strict terms are kept as they are.
"""

from __future__ import annotations

import functools
import re
from fractions import Fraction
from typing import Mapping

from .errors import DecorationNotTrivial, NotDivisible, ParseError, TypeMismatch, Unsupported
from .exactalg import Poly, exact_divide, prod
from .piecewise import PPClass, StrictPP, min_fn, pullback_class, pushforward
from .stablegraphs import StableGraph, canonical_form, canonicalize, graph_star, moduli_cone_stack
from .stratalgebra import (Deco, StrataElem, deco_fits, deco_poly_mul, deco_to_json, format_deco, format_term, graph_and_deco_from_json, psi_as_boundary, pull_deco,
                           transport_to_canonical)
from .conestack import generic_structures

_SLOT = re.compile(r"^v(\d+)\.e(\d+)$")


def slot_of(name: str) -> tuple:
    m = _SLOT.match(name)
    if m:
        return ("v", int(m.group(1)), int(m.group(2)))
    if name.startswith("l") and name[1:].isdigit():
        return ("l", int(name[1:]))
    raise ParseError(f"{name!r} is not a star coordinate")


# ------------------------------------------------------------ builders
def edge_function(G: StableGraph, poly: "Poly | str") -> StrictPP:
    """The strict function on the star of ``G`` given by a polynomial in the
    edge lengths ``l0, l1, ...`` (pulled back from the edge orthant)."""
    star = graph_star(G)
    p = Poly.parse(poly) if isinstance(poly, str) else poly
    allowed = set(star.edge_names)
    for v in p.variables:
        if v not in allowed:
            raise ParseError(f"{v!r} is not an edge length of the graph")
    vals = []
    for o in range(len(star.stack.objects)):
        _, T = star.parts(o)
        vals.append(p.substitute({f"l{e}": (Poly.var(f"l{e}") if e in T else 0) for e in range(G.num_edges)}))
    return StrictPP(star.bounded, vals, check=False)


def F(G: StableGraph) -> StrictPP:
    """``F_G``: the product of all edge lengths."""
    return edge_function(G, prod(Poly.var(f"l{e}") for e in range(G.num_edges)))


def vertex_function(G: StableGraph, v: int, f: StrictPP) -> StrictPP:
    """Pullback of a strict function on the vertex moduli stack of ``v``
    along the projection of the star."""
    star = graph_star(G)
    if f.stack.stack is not star.factors[v]:
        raise TypeMismatch("function is not on the vertex moduli stack")
    vals = []
    for o in range(len(star.stack.objects)):
        local, _ = star.parts(o)
        lo = local[v]
        names = star.factors[v].objects[lo].rays
        vals.append(f.values[lo].rename({r: f"v{v}.{r}" for r in names}))
    return StrictPP(star.bounded, vals, check=False)


def _as_class(G: StableGraph, f) -> PPClass:
    star = graph_star(G)
    if f is None:
        return PPClass.strict(F(G))
    if isinstance(f, (str, Poly)):
        return PPClass.strict(edge_function(G, f))
    if isinstance(f, StrictPP):
        if f.stack.stack is not star.stack:
            raise TypeMismatch("function is not on the star of the graph")
        return PPClass.strict(f.with_stack(star.bounded))
    if isinstance(f, PPClass):
        if f.base.stack is not star.stack:
            raise TypeMismatch("class is not on the star of the graph")
        return f
    raise ParseError(f"cannot interpret {f!r} as a piecewise polynomial")


# ------------------------------------------------------------- elements
class LogElem:
    """Element of the log strata algebra of ``M_{g,n}``-bar in normal form.

    ``classical`` holds the strict part as a :class:`StrataElem`;
    ``nonstrict`` maps ``(G, decoration)`` to a class on a proper
    subdivision of the star of ``G`` (coefficients absorbed).
    """

    __slots__ = ("g", "n", "classical", "nonstrict")

    def __init__(self, g: int, n: int, classical: StrataElem | None = None, nonstrict: Mapping | None = None):
        self.g, self.n = g, n
        self.classical = classical if classical is not None else StrataElem.zero(g, n)
        if (self.classical.g, self.classical.n) != (g, n) or self.classical.base.num_edges:
            raise TypeMismatch("classical part of the wrong type")
        self.nonstrict = {k: v for k, v in (nonstrict or {}).items() if not v.is_zero()}

    @classmethod
    def zero(cls, g: int, n: int) -> "LogElem":
        return cls(g, n)

    @classmethod
    def one(cls, g: int, n: int) -> "LogElem":
        return cls(g, n, StrataElem.one(g, n))

    @classmethod
    def from_strata(cls, s: StrataElem) -> "LogElem":
        """The embedding ``[G, gamma] -> [G, F_G, gamma]``."""
        return cls(s.g, s.n, s)

    @classmethod
    def stratum(cls, G: StableGraph, f=None, deco: Deco = (), coeff=1) -> "LogElem":
        """``coeff * [G, f, deco]``, normalized; ``f`` defaults to ``F_G``."""
        C = canonical_form(G)
        if C != G:
            raise ParseError("log strata must be given on canonical graphs")
        return normalize_terms(G.genus, G.n, [(G, tuple(sorted(deco)), _as_class(G, f), Fraction(coeff))])

    # ---------------------------------------------------------- algebra
    def _check(self, other: "LogElem") -> None:
        if not isinstance(other, LogElem) or (other.g, other.n) != (self.g, self.n):
            raise TypeMismatch("log classes of different type")

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        ns = dict(self.nonstrict)
        for k, v in other.nonstrict.items():
            ns[k] = ns[k] + v if k in ns else v
        return LogElem(self.g, self.n, self.classical + other.classical, ns)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "LogElem":
        c = Fraction(c)
        return LogElem(self.g, self.n, self.classical.scale(c), {k: v * c for k, v in self.nonstrict.items()})

    def __mul__(self, other):
        if isinstance(other, LogElem):
            return log_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        if not isinstance(other, LogElem) or (other.g, other.n) != (self.g, self.n):
            return False
        if self.classical != other.classical or set(self.nonstrict) != set(other.nonstrict):
            return False
        return all(self.nonstrict[k] == other.nonstrict[k] for k in self.nonstrict)

    def __hash__(self):
        return hash((self.classical, frozenset(self.nonstrict)))

    def is_zero(self) -> bool:
        return self.classical.is_zero() and not self.nonstrict

    def is_strict(self) -> bool:
        return not self.nonstrict

    def terms(self) -> list:
        """All terms as ``(G, decoration, class, coeff)``."""
        out = []
        M = self.classical.M
        for (t, _, d), c in self.classical.sorted_terms():
            G = M.graphs[t]
            out.append((G, d, PPClass.strict(F(G)), c))
        for (G, d), f in sorted(self.nonstrict.items(), key=lambda kv: (kv[0][0].num_edges, str(kv[0][0]), kv[0][1])):
            out.append((G, d, f, Fraction(1)))
        return out

    def normalize(self) -> "LogElem":
        return normalize_terms(self.g, self.n, self.terms())

    def __str__(self) -> str:
        parts = []
        for (t, _, d), c in self.classical.sorted_terms():
            G = self.classical.M.graphs[t]
            parts.append(f"{c}*[{G}; F; {format_deco(d)}]")
        for (G, d), f in self.nonstrict.items():
            parts.append(f"[{G}; {f!r}; {format_deco(d)}]")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__

    def to_json(self) -> dict:
        terms = []
        for G, d, f, c in self.terms():
            terms.append({"graph": G.to_json(), "f": f.to_json(), "decoration": deco_to_json(d), "coeff": str(c)})
        return {"g": self.g, "n": self.n, "terms": terms}

    @classmethod
    def from_json(cls, data: dict) -> "LogElem":
        try:
            g, n = int(data["g"]), int(data["n"])
            raw = []
            for term in data.get("terms", []):
                G0, d = graph_and_deco_from_json(term)
                if (G0.genus, G0.n) != (g, n):
                    raise TypeMismatch("term graph of the wrong type")
                G, d = transport_to_canonical(G0, d)
                if "f" in term:
                    fd = term["f"]
                    if isinstance(fd, str):
                        f = PPClass.strict(edge_function(G, _rename_edges(G0, fd)))
                    elif G != G0:
                        raise ParseError("piecewise data must be given on a canonical graph")
                    else:
                        f = PPClass.from_json(graph_star(G).bounded, fd)
                else:
                    f = PPClass.strict(F(G))
                raw.append((G, d, f, Fraction(term.get("coeff", 1))))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed log class JSON: {exc!r}") from None
        return normalize_terms(g, n, raw)


def _rename_edges(G0: StableGraph, poly: str) -> Poly:
    """A polynomial in ``l{k}`` on ``G0`` rewritten for ``canonical_form(G0)``."""
    p = Poly.parse(poly)
    iso = canonicalize(G0)
    ren = {}
    for k in range(G0.num_edges):
        ren[f"l{k}"] = Poly.var(f"l{(iso.hmap[G0.n + 2 * k] - G0.n) // 2}")
    for v in p.variables:
        if v not in ren:
            raise ParseError(f"unknown edge variable {v}")
    return p.substitute(ren)


# ---------------------------------------------------------- normal form
def _glue_deco(G: StableGraph, d: Deco, label_map: dict, vertex_map: dict) -> dict:
    """Transport a decoration on ``G`` to a glued degeneration."""
    out = {(): Fraction(1)}
    for f, e in d:
        if f[0] == "psi":
            h = f[1] if f[1] < G.n else label_map[("G", f[1])]
            lin = {((("psi", h), 1),): Fraction(1)}
        else:
            verts = sorted({c for (u, _), c in vertex_map.items() if u == f[1]})
            lin = {((("kappa", c, f[2]), 1),): Fraction(1) for c in verts}
        for _ in range(e):
            out = deco_poly_mul(out, lin)
    return out


def _strict_to_classical(G: StableGraph, d: Deco, v: StrictPP, coeff: Fraction) -> dict:
    """Classical terms ``{(t, arrow, deco): coeff}`` of ``[G, v, d]`` for a
    strict homological ``v``."""
    star = graph_star(G)
    st = star.stack
    M = moduli_cone_stack(G.genus, G.n)
    out = {}
    for o in star.bounded.interior:
        poly = v.values[o]
        if poly.is_zero():
            continue
        names = st.objects[o].rays
        slots = [slot_of(r) for r in names]
        FG = prod(Poly.var(r) for r, s in zip(names, slots) if s[0] == "l")
        try:
            q = exact_divide(poly, FG)
        except NotDivisible:
            raise NotDivisible(f"function is not divisible by F on {st.objects[o].name}") from None
        vnames = [r for r, s in zip(names, slots) if s[0] == "v"]
        pieces = []
        for m, c in q.items():
            exps = dict(m)
            if all(exps.get(r, 0) >= 1 for r in vnames):
                pieces.append((exps, c))
        if not pieces:
            continue
        C, label_map, vertex_map, slot_map = star.glue(o)[0]
        t = M.index[C]
        arrow = M.arrow_from_trivial(t)
        weight = coeff / st.aut_order(o)
        base = _glue_deco(G, d, label_map, vertex_map)
        for exps, c in pieces:
            poly_d = base
            for r, e in exps.items():
                s = slot_of(r)
                k = e - (1 if s[0] == "v" else 0)
                if k:
                    a, b = C.edge_halfedges(slot_map[s])
                    lin = {((("psi", a), 1),): Fraction(-1), ((("psi", b), 1),): Fraction(-1)}
                    for _ in range(k):
                        poly_d = deco_poly_mul(poly_d, lin)
            for dd, cc in poly_d.items():
                if deco_fits(C, dd):
                    key = (t, arrow, dd)
                    out[key] = out.get(key, 0) + weight * c * cc
    return out


def _symmetrize(G: StableGraph, d: Deco, f: PPClass) -> tuple:
    """Canonical representative of ``[G, f, d]`` under ``Aut(G)``.

    ``[G, f, d] = [G, s*f, s*d]`` for every automorphism ``s``; the
    representative uses the smallest decoration in the orbit and averages
    ``f`` over the automorphisms carrying ``d`` to it.
    """
    M = moduli_cone_stack(G.genus, G.n)
    auts = M.aut(M.index[G])
    if len(auts) == 1:
        return d, f
    images = []
    for a in auts:
        (d2, _), = pull_deco(M, a, d).items()
        images.append((d2, a))
    best = min(d2 for d2, _ in images)
    chosen = [a for d2, a in images if d2 == best]
    total = None
    for a in chosen:
        g = pull_to_degeneration(G, f, M, a)
        total = g if total is None else total + g
    return best, (total * Fraction(1, len(chosen))).simplify()


def normalize_terms(g: int, n: int, terms) -> LogElem:
    """Normal form of a sum of ``(G, deco, class, coeff)`` terms."""
    classical = {}
    nonstrict = {}
    for G, d, f, c in terms:
        if not c:
            continue
        if not deco_fits(G, d):
            continue
        if isinstance(f, StrictPP):
            f = PPClass.strict(f)
        f = f.simplify()
        if f.sub.history:
            d, f = _symmetrize(G, d, f)
            key = (G, d)
            val = f * c
            nonstrict[key] = nonstrict[key] + val if key in nonstrict else val
            continue
        if not f.value.is_homological():
            raise NotDivisible("the piecewise polynomial does not vanish on the boundary of the star")
        for k, v in _strict_to_classical(G, d, f.value, Fraction(c)).items():
            classical[k] = classical.get(k, 0) + v
    return LogElem(g, n, StrataElem(g, n, classical), nonstrict)


def normalize(c: LogElem) -> LogElem:
    return c.normalize()


# -------------------------------------------------------------- product
@functools.lru_cache(maxsize=None)
def _contraction(Gp: StableGraph, Gi: StableGraph, hinj: tuple, vsurj: tuple):
    return graph_star(Gp).contraction_morphism(graph_star(Gi), hinj, vsurj)


def pull_to_degeneration(G: StableGraph, f: PPClass, M, phi: int) -> PPClass:
    """Pull a class on the star of ``G`` back to the star of the target of
    the arrow ``phi: sigma_G -> sigma_G'``."""
    ar = M.arrows[phi]
    Gp = M.graphs[ar.dst]
    _, _, _, hinj, vsurj = ar.key
    m = _contraction(Gp, G, hinj, vsurj)
    return pullback_class(f, m, graph_star(Gp).bounded)


def log_product(a: LogElem, b: LogElem) -> LogElem:
    """Product over generic graph structures; the pulled-back functions and
    decorations are multiplied and the result normalized."""
    a._check(b)
    M = moduli_cone_stack(a.g, a.n)
    out = []
    for G1, d1, f1, c1 in a.terms():
        t1 = M.index[G1]
        for G2, d2, f2, c2 in b.terms():
            t2 = M.index[G2]
            for s in generic_structures(M, M.arrow_from_trivial(t1), M.arrow_from_trivial(t2)):
                Gp = M.graphs[s.target]
                g1 = pull_to_degeneration(G1, f1, M, s.phi1)
                g2 = pull_to_degeneration(G2, f2, M, s.phi2)
                f = g1 * g2
                if f.is_zero():
                    continue
                deco = deco_poly_mul(pull_deco(M, s.phi1, d1), pull_deco(M, s.phi2, d2))
                for d, c in deco.items():
                    out.append((Gp, d, f, c1 * c2 * c / s.aut_order))
    return normalize_terms(a.g, a.n, out)


# ---------------------------------------------------- to piecewise data
def push_to_log_pp(c: LogElem) -> PPClass:
    """Sum of the pushforwards of the ``f`` along the gluing morphisms of the
    stars (all decorations must be trivial)."""
    M = moduli_cone_stack(c.g, c.n)
    total = PPClass.zero(M)
    for G, d, f, coeff in c.terms():
        if d:
            raise DecorationNotTrivial(f"decoration {format_term(G, d)} is not trivial")
        star = graph_star(G)
        total = total + pushforward(f, star.to_moduli(), M) * coeff
    return total


def _psi_function(g_v: int, n_v: int, i: int) -> StrictPP:
    """``psi_i`` on the genus-0 vertex stack as a sum of boundary rays."""
    Mv = moduli_cone_stack(g_v, n_v)
    if g_v != 0:
        raise Unsupported("psi classes are only evaluated at genus-0 vertices")
    if n_v == 3:
        return StrictPP.zero(Mv)
    others = [m for m in range(1, n_v + 1) if m != i][:2]
    s = psi_as_boundary(n_v, i, *others)
    total = StrictPP.zero(Mv)
    for (t, _, _), c in s.terms.items():
        total = total + StrictPP.ray_function(Mv, t) * c
    return total


def evaluate_genus0(c: LogElem) -> PPClass:
    """The log Chow class (as a class on a subdivision of ``Sigma_{0,n}``)
    of a genus-0 log strata element."""
    if c.g != 0:
        raise Unsupported("evaluation is implemented in genus 0 only")
    M = moduli_cone_stack(0, c.n)
    total = PPClass.zero(M)
    for G, d, f, coeff in c.terms():
        star = graph_star(G)
        dec = StrictPP.const(star.bounded, 1)
        for fac, e in d:
            if fac[0] != "psi":
                raise Unsupported("kappa classes are not evaluated")
            v, i = star.local_marking[fac[1]]
            pv = vertex_function(G, v, _psi_function(*star.vertex_types[v], i + 1))
            for _ in range(e):
                dec = dec * pv
        total = total + pushforward(f * dec, star.to_moduli(), M) * coeff
    return total


# ------------------------------------------------------ genus-1 witness
def genus1_witness_graph() -> StableGraph:
    """Two genus-0 vertices joined by two edges, markings 1, 2 | 3."""
    return canonical_form(StableGraph.make((0, 0), (0, 0, 1), [(0, 1), (0, 1)]))


def kernel_witness_genus1() -> dict:
    """Build ``h = WDVV(v) * min(l0, l1)`` on the star of the genus-1 graph
    above and certify that it is homological on the barycentric subdivision
    of the edge face, not strict on the star itself, and equal to an
    independent cell-by-cell construction."""
    from .genus0 import wdvv_generators

    G = genus1_witness_graph()
    star = graph_star(G)
    v4 = next(v for v, t in enumerate(star.vertex_types) if t == (0, 4))
    w = wdvv_generators(4)[0]
    wv = vertex_function(G, v4, w.value)
    mn = min_fn(star.bounded, star.top_trivial, ["l0", "l1"])
    h = mn * wv
    sub = h.sub
    cur = sub.current.stack

    homological = h.value.is_homological() and h.value.is_compatible() and not h.is_zero()

    # (b): over some base object the cell polynomials, rewritten in base
    # coordinates, are different polynomials
    from .exactalg import solve_square
    nonstrict_objects = []
    for b in range(len(star.stack.objects)):
        seen = set()
        for c in sub.cells_over(b):
            gens = sub.cell_generators(c)
            if len(gens) != star.stack.objects[b].dim:
                continue
            mt = [[Fraction(gens[i][j]) for i in range(len(gens))] for j in range(len(gens))]
            inv = solve_square(mt)
            src = cur.objects[c].rays
            tgt = star.stack.objects[b].rays
            mp = {src[i]: Poly.linear({tgt[j]: inv[i][j] for j in range(len(gens)) if inv[i][j]})
                  for i in range(len(gens))}
            seen.add(h.value.values[c].substitute(mp))
        if len(seen) > 1:
            nonstrict_objects.append(b)
    not_strict = bool(nonstrict_objects) and h.simplify().sub.history != ()

    # (c): independent construction from the cell generators
    l0, l1 = star.edge_names
    ok = True
    for c in range(len(cur.objects)):
        b = sub.cell_base(c)
        gens = sub.cell_generators(c)
        brays = star.stack.objects[b].rays
        rays = cur.objects[c].rays
        wb = wv.values[b]
        mins = Poly.zero()
        wval = Poly.zero()
        for i, gvec in enumerate(gens):
            pt = dict(zip(brays, gvec))
            mins = mins + Poly.monomial({rays[i]: 1}, min(pt.get(l0, 0), pt.get(l1, 0)))
            wval = wval + Poly.monomial({rays[i]: 1}, wb.evaluate({r: pt.get(r, 0) for r in wb.variables}))
        if mins * wval != h.value.values[c]:
            ok = False
            break
    return {
        "graph": str(G),
        "cells": len(cur.objects),
        "homological": homological,
        "not_strict": not_strict,
        "nonstrict_objects": [star.stack.objects[b].name for b in nonstrict_objects],
        "matches_cellwise": ok,
        "ok": homological and not_strict and ok,
        "h": h,
    }
