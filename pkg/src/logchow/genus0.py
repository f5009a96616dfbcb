"""Genus zero: the Keel ring and log Chow groups of M_{0,n}-bar.

Strict piecewise polynomials on a simplicial cone stack with trivial
automorphisms (the tropical moduli stack in genus 0 and its stellar
subdivisions) form a Stanley-Reisner ring; a polynomial on a cone expands
uniquely into monomials whose support is exactly a cone.  Log Chow classes
are strict piecewise polynomials on a subdivision modulo the ideal generated
by the (pulled back) WDVV relations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .conestack import as_bounded
from .errors import TypeMismatch
from .exactalg import Poly, SparseEchelon
from .piecewise import PPClass, StrictPP, Subdivision, pullback, restrict, common_refinement
from .stablegraphs import delta, moduli_cone_stack

SRMono = tuple  # sorted tuple of (global ray, exponent)


class SRData:
    """Stanley-Reisner view of a simplicial stack with unique faces."""

    def __init__(self, stack):
        self.bounded = as_bounded(stack)
        st = self.bounded.stack
        self.stack = st
        self.rays = [o for o, obj in enumerate(st.objects) if obj.dim == 1]
        self.local_rays = []
        self.cones = {}
        for o, obj in enumerate(st.objects):
            glob = []
            for i in range(obj.dim):
                a = st.face_arrow(o, [i])
                glob.append(st.arrows[a].src)
            if len(set(glob)) != len(glob):
                raise TypeMismatch(f"object {obj.name} is not simplicially embedded")
            key = frozenset(glob)
            if key in self.cones:
                raise TypeMismatch("two objects with the same ray support")
            self.cones[key] = o
            self.local_rays.append(tuple(glob))

    def expand(self, f: StrictPP) -> dict:
        """Monomial coordinates ``{SRMono: coeff}`` of a strict function."""
        if f.stack.stack is not self.stack:
            raise TypeMismatch("function on a different stack")
        out = {}
        for o, obj in enumerate(self.stack.objects):
            names = {r: i for i, r in enumerate(obj.rays)}
            glob = self.local_rays[o]
            for m, c in f.values[o].items():
                if len(m) != obj.dim:
                    continue
                key = tuple(sorted((glob[names[v]], e) for v, e in m))
                out[key] = out.get(key, 0) + c
        return {k: v for k, v in out.items() if v}

    def monomials(self, d: int) -> list:
        """All degree-``d`` monomials whose support is a cone."""
        out = []
        for support, o in sorted(self.cones.items(), key=lambda kv: kv[1]):
            k = len(support)
            if k > d or (k == 0 and d > 0):
                continue
            rays = sorted(support)
            for cut in itertools.combinations(range(1, d), k - 1) if k else [()]:
                bounds = (0,) + cut + (d,)
                exps = [bounds[i + 1] - bounds[i] for i in range(k)]
                out.append(tuple(zip(rays, exps)))
        return out

    def multiply(self, a: dict, b: dict) -> dict:
        out = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                d = dict(ma)
                for r, e in mb:
                    d[r] = d.get(r, 0) + e
                if frozenset(d) not in self.cones:
                    continue
                key = tuple(sorted(d.items()))
                out[key] = out.get(key, 0) + ca * cb
        return {k: v for k, v in out.items() if v}

    def to_function(self, coords: dict) -> StrictPP:
        """The strict function with the given monomial coordinates."""
        vals = []
        for o, obj in enumerate(self.stack.objects):
            pos = {g: i for i, g in enumerate(self.local_rays[o])}
            p = Poly.zero()
            for m, c in coords.items():
                if all(r in pos for r, _ in m):
                    p = p + Poly.monomial({obj.rays[pos[r]]: e for r, e in m}, c)
            vals.append(p)
        return StrictPP(self.bounded, vals, check=False)


# ----------------------------------------------------------------- WDVV
@dataclass(frozen=True)
class WdvvGenerator:
    n: int
    quadruple: tuple
    pair: tuple  # ((i,j),(k,l))-patterns whose difference is taken
    value: StrictPP


def _ray_obj(n: int, A: Iterable[int]) -> int:
    M = moduli_cone_stack(0, n)
    return M.index[delta(n, A)]


def cross_ratio_divisor(n: int, i: int, j: int, k: int, l: int) -> StrictPP:
    """Sum of ``D_A`` over ``A`` containing ``i, j`` and neither ``k`` nor ``l``."""
    M = moduli_cone_stack(0, n)
    total = StrictPP.zero(M)
    rest = [m for m in range(1, n + 1) if m not in (i, j, k, l)]
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            total = total + StrictPP.ray_function(M, _ray_obj(n, {i, j, *extra}))
    return total


def wdvv_generators(n: int) -> list:
    """Two independent differences per quadruple ``i<j<k<l``."""
    if n < 4:
        raise ValueError("WDVV relations need n >= 4")
    out = []
    for q in itertools.combinations(range(1, n + 1), 4):
        i, j, k, l = q
        a = cross_ratio_divisor(n, i, j, k, l)
        b = cross_ratio_divisor(n, i, k, j, l)
        c = cross_ratio_divisor(n, i, l, j, k)
        out.append(WdvvGenerator(n, q, ((i, j), (i, k)), a - b))
        out.append(WdvvGenerator(n, q, ((i, k), (i, l)), b - c))
    return out


# ------------------------------------------------------- quotient spaces
_RELATIONS: dict = {}


def _moduli_subdivision(n: int, sub: Subdivision | None) -> Subdivision:
    M = moduli_cone_stack(0, n)
    if sub is None:
        return Subdivision(M)
    if sub.base.stack is not M:
        raise TypeMismatch("subdivision of a different stack")
    return sub


def _relations(n: int, sub: Subdivision, d: int) -> tuple:
    key = (n, sub.history, d)
    hit = _RELATIONS.get(key)
    if hit is not None:
        return hit
    sr = SRData(sub.current)
    ech = SparseEchelon()
    if d >= 1 and n >= 4:
        gens = []
        for w in wdvv_generators(n):
            g = w.value if not sub.history else pullback(w.value, sub.to_base, sub.current)
            gens.append(sr.expand(g))
        lower = [{m: Fraction(1)} for m in sr.monomials(d - 1)]
        for g in gens:
            for m in lower:
                row = sr.multiply(g, m)
                if row:
                    ech.add(row)
    _RELATIONS[key] = (sr, ech)
    return sr, ech


def log_chow_rank(n: int, d: int, sub: Subdivision | None = None) -> int:
    """Dimension of degree-``d`` strict functions on the subdivision modulo
    the WDVV ideal."""
    sub = _moduli_subdivision(n, sub)
    sr, ech = _relations(n, sub, d)
    return len(sr.monomials(d)) - ech.rank


def keel_rank(n: int, d: int) -> int:
    if n < 3 or not 0 <= d <= n - 3:
        raise ValueError("keel_rank needs n >= 3 and 0 <= d <= n - 3")
    return log_chow_rank(n, d)


def keel_ranks(n: int) -> tuple:
    return tuple(keel_rank(n, d) for d in range(n - 2))


def _as_class(f, n: int) -> PPClass:
    if isinstance(f, StrictPP):
        f = PPClass.strict(f)
    if f.base.stack is not moduli_cone_stack(0, n):
        raise TypeMismatch("class is not on the genus-0 moduli stack of this n")
    return f


def in_wdvv_ideal(f, n: int) -> bool:
    """Whether every homogeneous part of ``f`` lies in the WDVV ideal."""
    f = _as_class(f, n)
    sr_cur = SRData(f.sub.current)
    coords = sr_cur.expand(f.value)
    by_deg = {}
    for m, c in coords.items():
        by_deg.setdefault(sum(e for _, e in m), {})[m] = c
    for d, part in by_deg.items():
        if d == 0:
            return False
        _, ech = _relations(n, f.sub, d)
        if not ech.contains(part):
            return False
    return True


def log_chow_equal(a, b, n: int | None = None) -> bool:
    """Equality in the log Chow ring: ``a - b`` is in the WDVV ideal on a
    common refinement of the two subdivisions."""
    if isinstance(a, StrictPP):
        a = PPClass.strict(a)
    if isinstance(b, StrictPP):
        b = PPClass.strict(b)
    if n is None:
        n = a.base.stack.n
    a, b = _as_class(a, n), _as_class(b, n)
    if a.sub.history != b.sub.history:
        sub = common_refinement(a.sub, b.sub)
        a, b = restrict(a, sub), restrict(b, sub)
    return in_wdvv_ideal(a - b, n)


def sr_coordinates(f, n: int) -> dict:
    f = _as_class(f, n)
    return SRData(f.sub.current).expand(f.value)


def boundary_divisor(n: int, A: Iterable[int]) -> StrictPP:
    M = moduli_cone_stack(0, n)
    return StrictPP.ray_function(M, _ray_obj(n, A))


def boundary_subsets(n: int) -> list:
    """One subset ``A`` per boundary divisor, normalized to contain 1."""
    out = []
    rest = list(range(2, n + 1))
    for r in range(1, n - 2):
        for extra in itertools.combinations(rest, r):
            out.append(frozenset((1, *extra)))
    return out


def ray_count(n: int) -> int:
    M = moduli_cone_stack(0, n)
    return sum(1 for o in M.objects if o.dim == 1)


def blowup_at_cone(n: int, edges: int = 2, which: int = 0) -> Subdivision:
    """Subdivision of Σ_{0,n} by one stellar at the barycenter of the
    ``which``-th cone of the given dimension."""
    M = moduli_cone_stack(0, n)
    cones = [o for o, obj in enumerate(M.objects) if obj.dim == edges]
    b = cones[which]
    return Subdivision(M).stellar(b, (1,) * edges)
