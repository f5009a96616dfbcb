"""Strict and homological piecewise polynomials, subdivisions and pushforward.

A :class:`StrictPP` assigns to every object of a cone stack a polynomial in
that object's ray variables, compatibly with all face arrows.  A
:class:`Subdivision` records an ordered stellar history over a base stack;
a :class:`PPClass` is a strict piecewise polynomial on some subdivision and
represents an element of the direct limit over subdivisions.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .conestack import (
    ConeStack,
    ConeStackWithBoundary,
    StackMorphism,
    as_bounded,
    identity_morphism,
    stellar_subdivide,
)
from .errors import HistoryMismatch, IncompatiblePP, NotRelDimZero, StackMismatch
from .exactalg import Poly, exact_divide, normalize_linear_form, solve_square, var_key

Scalar = "int | Fraction"


# ------------------------------------------------------------------ helpers
def restrict_along(stack: ConeStack, arrow: int, value: Poly) -> Poly:
    """Restriction of a value on the target of ``arrow`` to its source."""
    a = stack.arrows[arrow]
    src, dst = stack.objects[a.src], stack.objects[a.dst]
    mapping = {name: Poly.zero() for name in dst.rays}
    for i, r in enumerate(a.ray_map):
        mapping[dst.rays[r]] = Poly.var(src.rays[i])
    return value.substitute(mapping)


def pull_polynomial(m: StackMorphism, o: int, value: Poly) -> Poly:
    """Pull a value on ``m.object_map[o]`` back to the source object ``o``."""
    src = m.source.objects[o]
    tgt = m.target.objects[m.object_map[o]]
    mapping = {}
    for j, name in enumerate(tgt.rays):
        coeffs = {}
        for i, vec in enumerate(m.lattice[o]):
            if vec[j]:
                coeffs[src.rays[i]] = vec[j]
        mapping[name] = Poly.linear(coeffs)
    return value.substitute(mapping)


def _monomials(variables: Sequence[str], d: int):
    for combo in itertools.combinations_with_replacement(range(len(variables)), d):
        exps = {}
        for i in combo:
            exps[variables[i]] = exps.get(variables[i], 0) + 1
        yield tuple(sorted(exps.items(), key=lambda q: var_key(q[0])))


# --------------------------------------------------------------- StrictPP
class StrictPP:
    """Compatible family of polynomials on the objects of a cone stack."""

    __slots__ = ("stack", "values")

    def __init__(self, stack, values: Sequence[Poly], check: bool = True):
        self.stack = as_bounded(stack)
        vals = tuple(v if isinstance(v, Poly) else Poly.const(v) for v in values)
        if len(vals) != len(self.stack.stack.objects):
            raise ValueError("one value per object required")
        self.values = vals
        if check:
            problems = self.compatibility_problems()
            if problems:
                raise IncompatiblePP("; ".join(problems[:5]))

    # ----------------------------------------------------------- builders
    @classmethod
    def from_values(cls, stack, values: Mapping[int, "Poly | str"], check: bool = True) -> "StrictPP":
        """Build from values on some objects; the other objects are filled by
        restriction along any arrow from them (zero if none)."""
        bounded = as_bounded(stack)
        st = bounded.stack
        given = {o: (Poly.parse(v) if isinstance(v, str) else v) for o, v in values.items()}
        vals = []
        for o in range(len(st.objects)):
            if o in given:
                vals.append(given[o])
                continue
            val = None
            for a in st.out_arrows[o]:
                t = st.arrows[a].dst
                if t in given and t != o:
                    val = restrict_along(st, a, given[t])
                    break
            vals.append(val if val is not None else Poly.zero())
        return cls(bounded, vals, check=check)

    @classmethod
    def zero(cls, stack) -> "StrictPP":
        b = as_bounded(stack)
        return cls(b, [Poly.zero()] * len(b.stack.objects), check=False)

    @classmethod
    def const(cls, stack, c) -> "StrictPP":
        b = as_bounded(stack)
        return cls(b, [Poly.const(c)] * len(b.stack.objects), check=False)

    @classmethod
    def ray_function(cls, stack, ray_obj: int) -> "StrictPP":
        """Courant function of a ray: 1 on its generator, 0 on other rays."""
        b = as_bounded(stack)
        st = b.stack
        if st.objects[ray_obj].dim != 1:
            raise ValueError("ray_function needs a one-dimensional object")
        vals = []
        for o, obj in enumerate(st.objects):
            images = {st.arrows[a].ray_map[0] for a in st.homs(ray_obj, o)}
            vals.append(Poly.linear({obj.rays[i]: 1 for i in images}))
        return cls(b, vals, check=False)

    # ------------------------------------------------------------- checks
    def compatibility_problems(self) -> list:
        st = self.stack.stack
        out = []
        for i, a in enumerate(st.arrows):
            if restrict_along(st, i, self.values[a.dst]) != self.values[a.src]:
                out.append(f"arrow {i} ({st.objects[a.src].name} -> {st.objects[a.dst].name})")
        return out

    def is_compatible(self) -> bool:
        return not self.compatibility_problems()

    def is_homological(self) -> bool:
        return all(not self.values[o] for o in self.stack.boundary)

    @property
    def degree(self) -> int:
        return max((v.degree() for v in self.values if v), default=0)

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = {v.degree() for v in self.values if v}
        if not all(v.is_homogeneous() for v in self.values):
            return False
        if d is None:
            return len(degs) <= 1
        return degs <= {d}

    def homogeneous_part(self, d: int) -> "StrictPP":
        return StrictPP(self.stack, [v.homogeneous_part(d) for v in self.values], check=False)

    def is_zero(self) -> bool:
        return all(not v for v in self.values)

    # ---------------------------------------------------------- algebra
    def _same(self, other: "StrictPP") -> None:
        if not isinstance(other, StrictPP) or other.stack.stack is not self.stack.stack:
            raise StackMismatch("piecewise polynomials live on different stacks")

    def __add__(self, other):
        if not isinstance(other, StrictPP):
            return self + StrictPP.const(self.stack, other)
        self._same(other)
        return StrictPP(self.stack, [a + b for a, b in zip(self.values, other.values)], check=False)

    __radd__ = __add__

    def __neg__(self):
        return StrictPP(self.stack, [-a for a in self.values], check=False)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, StrictPP):
            c = other if isinstance(other, Poly) else Poly.const(other)
            return StrictPP(self.stack, [a * c for a in self.values], check=False)
        self._same(other)
        return StrictPP(self.stack, [a * b for a, b in zip(self.values, other.values)], check=False)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = StrictPP.const(self.stack, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, StrictPP) and other.stack.stack is self.stack.stack and other.values == self.values

    def __hash__(self):
        return hash(self.values)

    def with_stack(self, stack) -> "StrictPP":
        return StrictPP(stack, self.values, check=False)

    def to_json(self) -> dict:
        return {"values": {str(o): str(v) for o, v in enumerate(self.values)}}

    @classmethod
    def from_json(cls, stack, data: dict) -> "StrictPP":
        vals = {int(k): Poly.parse(v) for k, v in data["values"].items()}
        return cls.from_values(stack, vals)

    def __repr__(self) -> str:
        st = self.stack.stack
        return "StrictPP{" + ", ".join(f"{st.objects[o].name}: {v}" for o, v in enumerate(self.values) if v) + "}"

    # ------------------------------------------------------------ maps
    def pullback(self, m: StackMorphism, source_stack=None) -> "StrictPP":
        if m.target is not self.stack.stack:
            raise StackMismatch("pullback along a morphism with a different target")
        src = source_stack if source_stack is not None else m.source
        vals = [pull_polynomial(m, o, self.values[t]) for o, t in enumerate(m.object_map)]
        return StrictPP(src, vals, check=False)


HomPP = StrictPP


def pullback(f: StrictPP, m: StackMorphism, source_stack=None) -> StrictPP:
    return f.pullback(m, source_stack)


# -------------------------------------------------------- Brion pushforward
def check_rel_dim_zero(m: StackMorphism) -> None:
    """Every cone must map onto a cone of its own dimension, i.e. all
    lattice maps are injective."""
    from .exactalg import rank
    for o in range(len(m.source.objects)):
        if rank([list(v) for v in m.lattice[o]]) != m.source.objects[o].dim:
            raise NotRelDimZero(f"object {m.source.objects[o].name} is collapsed to a smaller cone")


def _act(stack: ConeStack, h: int, vec: Sequence) -> tuple:
    rm = stack.arrows[h].ray_map
    out = [0] * len(vec)
    for i, x in enumerate(vec):
        out[rm[i]] = x
    return tuple(out)


def _brion_value(target: ConeStack, t: int, terms: list) -> Poly:
    """Sum of ``w * f(u) * phi_t / prod(u)`` over the given terms.

    ``terms`` are ``(weight, source value, source rays, lattice rows)``.
    """
    tobj = target.objects[t]
    xs = [Poly.var(r) for r in tobj.rays]
    prepared = []
    forms = {}
    for w, value, src_rays, rows in terms:
        if not value:
            continue
        mt = [[Fraction(rows[i][j]) for i in range(len(rows))] for j in range(len(rows))]
        inv = solve_square(mt)
        us = []
        for i in range(len(rows)):
            us.append(Poly.linear({tobj.rays[j]: inv[i][j] for j in range(len(rows)) if inv[i][j]}))
        num = value.substitute({src_rays[i]: us[i] for i in range(len(rows))}) * w
        keys = []
        for u in us:
            scalar, key, prim = normalize_linear_form(u)
            num = num / scalar
            forms[key] = prim
            keys.append(key)
        prepared.append((num, keys))
    if not prepared:
        return Poly.zero()
    keys_all = sorted(forms)
    total = Poly.zero()
    for num, keys in prepared:
        ks = set(keys)
        if len(ks) != len(keys):
            raise ValueError("degenerate cone in pushforward")
        other = Poly.one()
        for k in keys_all:
            if k not in ks:
                other = other * forms[k]
        total = total + num * other
    den = Poly.one()
    for k in keys_all:
        den = den * forms[k]
    phi = Poly.one()
    for x in xs:
        phi = phi * x
    return exact_divide(total * phi, den)


def pushforward_strict(f: StrictPP, m: StackMorphism, target=None) -> StrictPP:
    """Brion pushforward of a strict piecewise polynomial along a
    relative-dimension-0 morphism.

    For each target object ``s`` the value is the groupoid sum over source
    objects ``s'`` over ``s`` (weight ``1/|Aut s'|``) and automorphisms ``h``
    of ``s`` of ``f_{s'}(u) * phi_s / prod(u)``, where ``u`` are the dual
    coordinates of the image cone and ``phi_s`` the product of the ray
    coordinates of ``s``.
    """
    if f.stack.stack is not m.source:
        raise StackMismatch("pushforward along a morphism with a different source")
    check_rel_dim_zero(m)
    tgt = as_bounded(target if target is not None else m.target)
    T = tgt.stack
    by_target = {}
    for o, t in enumerate(m.object_map):
        if m.source.objects[o].dim == T.objects[t].dim:
            by_target.setdefault(t, []).append(o)
    vals = []
    for t in range(len(T.objects)):
        terms = []
        for o in by_target.get(t, []):
            w = Fraction(1, m.source.aut_order(o))
            rows = m.lattice[o]
            for h in T.aut(t):
                hrows = [_act(T, h, r) for r in rows]
                terms.append((w, f.values[o], m.source.objects[o].rays, hrows))
        vals.append(_brion_value(T, t, terms))
    return StrictPP(tgt, vals, check=False)


# ---------------------------------------------------------- subdivisions
class Subdivision:
    """A stellar history over a base stack, replayed into a concrete stack.

    Operations are ``(base object, point)`` with the point written in base
    coordinates and normalized to the smallest representative of its
    automorphism orbit; each is applied at the cell whose generators sum to
    (an automorphic image of) the point.
    """

    def __init__(self, base, history: Iterable = ()):
        self.base = as_bounded(base)
        self.current = self.base
        self.to_base = identity_morphism(self.base.stack)
        self.history: tuple = ()
        for b, P in history:
            self._apply(b, tuple(P))

    @classmethod
    def trivial(cls, base) -> "Subdivision":
        return cls(base)

    def copy(self) -> "Subdivision":
        new = Subdivision.__new__(Subdivision)
        new.base, new.current, new.to_base, new.history = self.base, self.current, self.to_base, self.history
        return new

    # ----------------------------------------------------------- cells
    def cell_generators(self, c: int) -> tuple:
        return self.to_base.lattice[c]

    def cell_base(self, c: int) -> int:
        return self.to_base.object_map[c]

    def cells_over(self, b: int) -> list:
        return [c for c, t in enumerate(self.to_base.object_map) if t == b]

    def canonical_point(self, b: int, P: Sequence[int]) -> tuple:
        st = self.base.stack
        return min(_act(st, h, P) for h in st.aut(b))

    def find_barycentric_cell(self, b: int, P: Sequence[int]):
        """Cell over ``b`` whose generators sum to an image of ``P``."""
        st = self.base.stack
        P = tuple(P)
        orbit = {_act(st, h, P) for h in st.aut(b)}
        for c in self.cells_over(b):
            gens = self.cell_generators(c)
            s = tuple(sum(col) for col in zip(*gens)) if gens else ()
            if s in orbit:
                return c
        return None

    def is_ray(self, b: int, P: Sequence[int]) -> bool:
        c = self.find_barycentric_cell(b, P)
        return c is not None and self.current.stack.objects[c].dim == 1

    def _apply(self, b: int, P: tuple) -> None:
        self.base.stack.check_object(b)
        c = self.find_barycentric_cell(b, P)
        if c is None:
            raise HistoryMismatch(f"no cell over object {b} has barycenter {P}")
        if self.current.stack.objects[c].dim == 1:
            return
        new, step = stellar_subdivide(self.current, c, None, new_ray=f"b{len(self.history) + 1}")
        self.current = new
        self.to_base = step.then(self.to_base)
        self.history = self.history + ((b, self.canonical_point(b, P)),)

    def stellar(self, b: int, P: Sequence[int]) -> "Subdivision":
        new = self.copy()
        new._apply(b, tuple(P))
        return new

    def stellar_at(self, cell: int, point: Sequence[int] | None = None) -> "Subdivision":
        """Stellar subdivision at a point of a cell of the current stack
        (default: its barycenter)."""
        st = self.current.stack
        st.check_object(cell)
        if point is None:
            point = (1,) * st.objects[cell].dim
        # validation of interior / smoothness / symmetry on the concrete stack
        stellar_subdivide(self.current, cell, point)
        P = self.to_base.image_point(cell, point)
        return self.stellar(self.cell_base(cell), P)

    def replay(self, ops: Iterable) -> "Subdivision":
        new = self.copy()
        for b, P in ops:
            if not new.is_ray(b, P) and (b, new.canonical_point(b, P)) not in new.history:
                new._apply(b, tuple(P))
        return new

    def __eq__(self, other) -> bool:
        return isinstance(other, Subdivision) and other.base.stack is self.base.stack and other.history == self.history

    def __hash__(self):
        return hash(self.history)

    def __repr__(self) -> str:
        return f"Subdivision({self.base.stack.name}, history={list(self.history)})"

    def to_json(self) -> list:
        return [{"object": b, "point": list(P)} for b, P in self.history]

    @classmethod
    def from_json(cls, base, data: list) -> "Subdivision":
        return cls(base, [(op["object"], tuple(op["point"])) for op in data])

    # ------------------------------------------------------- cell location
    def locate(self, b: int, vectors: Sequence[Sequence[int]]):
        """Find a cell over ``b`` containing all ``vectors`` (base coordinates).

        Returns ``(cell, rows)`` where ``rows[i]`` are the coordinates of
        vector ``i`` in the cell's generators, after an automorphism of ``b``
        (the cone of the located cell is the smallest containing them).
        """
        st = self.base.stack
        for c in self.cells_over(b):
            gens = self.cell_generators(c)
            if len(gens) != st.objects[b].dim:
                continue
            inv = _inverse_rows(gens)
            for h in st.aut(b):
                rows = []
                ok = True
                for v in vectors:
                    hv = _act(st, h, v)
                    coords = [sum(Fraction(hv[j]) * inv[j][i] for j in range(len(hv))) for i in range(len(gens))]
                    if any(x < 0 for x in coords):
                        ok = False
                        break
                    rows.append(coords)
                if ok:
                    return c, rows
        return None

    def morphism_from(self, other: "Subdivision") -> StackMorphism:
        """Refinement morphism ``other.current -> self.current`` when
        ``other`` refines ``self`` (same base)."""
        if other.base.stack is not self.base.stack:
            raise StackMismatch("subdivisions of different stacks")
        omap, lattice = [], []
        for c in range(len(other.current.stack.objects)):
            b = other.cell_base(c)
            gens = other.cell_generators(c)
            found = self._locate_face(b, gens)
            if found is None:
                raise HistoryMismatch("subdivision is not a refinement")
            t, rows = found
            omap.append(t)
            lattice.append(rows)
        return StackMorphism(other.current.stack, self.current.stack, tuple(omap), tuple(lattice), None)

    def _locate_face(self, b: int, vectors: Sequence[Sequence[int]]):
        """Locate the smallest cell (possibly a face cell over ``b``)
        containing the vectors, returning integer coordinate rows."""
        if not vectors:
            for c in self.cells_over(b):
                if self.current.stack.objects[c].dim == 0:
                    return c, ()
            return None
        found = self.locate(b, vectors)
        if found is None:
            return None
        c, rows = found
        used = sorted({i for r in rows for i, x in enumerate(r) if x})
        st = self.current.stack
        if len(used) == len(rows[0]):
            return c, tuple(tuple(int(x) for x in r) for r in rows)
        face = st.face_arrow(c, used)
        rm = st.arrows[face].ray_map
        pos = {r: k for k, r in enumerate(rm)}
        out = []
        for r in rows:
            vec = [0] * len(rm)
            for i, x in enumerate(r):
                if x:
                    if x.denominator != 1:
                        return None
                    vec[pos[i]] = int(x)
            out.append(tuple(vec))
        return st.arrows[face].src, tuple(out)


def _inverse_rows(gens: Sequence[Sequence[int]]) -> list:
    """Matrix ``M`` with ``v = sum_i (v @ M)[i] * gens[i]``."""
    n = len(gens)
    mt = [[Fraction(gens[i][j]) for j in range(n)] for i in range(n)]
    return solve_square(mt)


def common_refinement(a: Subdivision, b: Subdivision) -> Subdivision:
    if a.base.stack is not b.base.stack:
        raise StackMismatch("subdivisions of different stacks")
    if a.history == b.history:
        return a
    try:
        r = a.replay(b.history)
        b.morphism_from(r)
        a.morphism_from(r)
    except (HistoryMismatch, ValueError) as exc:
        raise HistoryMismatch(f"no common refinement from shared histories: {exc}") from None
    return r


def pullback_subdivision(sub: Subdivision, m: StackMorphism, source) -> Subdivision:
    """Pull a stellar history back along ``m: source -> sub.base``: each
    operation at ``b`` becomes operations at all equal-dimensional objects
    over ``b``."""
    out = Subdivision(source)
    ops = []
    for b, P in sub.history:
        for o, t in enumerate(m.object_map):
            if t != b:
                continue
            rows = m.lattice[o]
            if len(rows) != m.target.objects[t].dim:
                raise HistoryMismatch("cannot pull a stellar operation through a non-square lattice map")
            mt = [[Fraction(rows[i][j]) for i in range(len(rows))] for j in range(len(rows))]
            inv = solve_square(mt)
            Pp = [sum(inv[i][j] * P[j] for j in range(len(P))) for i in range(len(rows))]
            if any(x.denominator != 1 or x <= 0 for x in Pp):
                raise HistoryMismatch("pulled stellar point is not an interior lattice point")
            ops.append((o, tuple(int(x) for x in Pp)))
    return out.replay(ops)


# ---------------------------------------------------------------- PPClass
class PPClass:
    """A strict piecewise polynomial on a subdivision of a base stack."""

    __slots__ = ("sub", "value")

    def __init__(self, sub: Subdivision, value: StrictPP):
        if value.stack.stack is not sub.current.stack:
            raise StackMismatch("value does not live on the subdivision")
        self.sub = sub
        self.value = value

    @classmethod
    def strict(cls, f: StrictPP) -> "PPClass":
        return cls(Subdivision(f.stack), f)

    @classmethod
    def zero(cls, base) -> "PPClass":
        return cls.strict(StrictPP.zero(base))

    @classmethod
    def const(cls, base, c) -> "PPClass":
        return cls.strict(StrictPP.const(base, c))

    @property
    def base(self) -> ConeStackWithBoundary:
        return self.sub.base

    def is_strict_on_base(self) -> bool:
        return not self.sub.history

    def is_homological(self) -> bool:
        return self.value.is_homological()

    def is_zero(self) -> bool:
        return self.value.is_zero()

    @property
    def degree(self) -> int:
        return self.value.degree

    def restrict(self, finer: Subdivision) -> "PPClass":
        return restrict(self, finer)

    def _align(self, other: "PPClass") -> tuple:
        if other.base.stack is not self.base.stack:
            raise StackMismatch("classes on different stacks")
        if other.sub.history == self.sub.history:
            return self.value, other.value.with_stack(self.sub.current), self.sub
        sub = common_refinement(self.sub, other.sub)
        return restrict(self, sub).value, restrict(other, sub).value, sub

    def _coerce(self, other):
        if isinstance(other, StrictPP) and other.stack.stack is not self.sub.current.stack:
            return PPClass.strict(other)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if not isinstance(other, PPClass):
            return PPClass(self.sub, self.value + other)
        a, b, sub = self._align(other)
        return PPClass(sub, a + b)

    __radd__ = __add__

    def __neg__(self):
        return PPClass(self.sub, -self.value)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        other = self._coerce(other)
        if not isinstance(other, PPClass):
            return PPClass(self.sub, self.value * other)
        a, b, sub = self._align(other)
        return PPClass(sub, a * b)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PPClass.const(self.base, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, PPClass):
            return False
        try:
            a, b, _ = self._align(other)
        except (HistoryMismatch, StackMismatch):
            return False
        return a == b

    def __hash__(self):
        return hash(len(self.sub.history))

    def homogeneous_part(self, d: int) -> "PPClass":
        return PPClass(self.sub, self.value.homogeneous_part(d))

    def simplify(self) -> "PPClass":
        """Drop trailing stellar operations on which the class is linear
        (tries to descend to the coarser subdivision at every step)."""
        out = self
        while out.sub.history:
            coarser = Subdivision(out.base, out.sub.history[:-1])
            down = descend(out, coarser)
            if down is None:
                break
            out = down
        return out

    def to_json(self) -> dict:
        return {"history": self.sub.to_json(), **self.value.to_json()}

    @classmethod
    def from_json(cls, base, data: dict) -> "PPClass":
        sub = Subdivision.from_json(base, data.get("history", []))
        return cls(sub, StrictPP.from_json(sub.current, data))

    def __repr__(self) -> str:
        return f"PPClass(history={list(self.sub.history)}, {self.value!r})"

    def pullback(self, m: StackMorphism, source) -> "PPClass":
        return pullback_class(self, m, source)


def restrict(f: PPClass, finer: Subdivision) -> PPClass:
    """Re-express a class on a finer subdivision (same base)."""
    if finer.base.stack is not f.base.stack:
        raise HistoryMismatch("restriction to a subdivision of another stack")
    if finer.history == f.sub.history:
        return PPClass(finer, f.value.with_stack(finer.current)) if finer is not f.sub else f
    m = f.sub.morphism_from(finer)
    return PPClass(finer, f.value.pullback(m, finer.current))


def descend(f: PPClass, coarser: Subdivision):
    """The class on a coarser subdivision if ``f`` is strict there, else None."""
    try:
        m = coarser.morphism_from(f.sub)
    except HistoryMismatch:
        return None
    st = coarser.current.stack
    vals = [None] * len(st.objects)
    for c, t in enumerate(m.object_map):
        if len(m.lattice[c]) == st.objects[t].dim and vals[t] is None:
            rows = [[Fraction(x) for x in r] for r in m.lattice[c]]
            mt = [[rows[i][j] for i in range(len(rows))] for j in range(len(rows))]
            inv = solve_square(mt) if rows else []
            src = f.sub.current.stack.objects[c].rays
            mapping = {src[i]: Poly.linear({st.objects[t].rays[j]: inv[i][j] for j in range(len(rows)) if inv[i][j]})
                       for i in range(len(rows))}
            vals[t] = f.value.values[c].substitute(mapping)
    vals = [v if v is not None else Poly.zero() for v in vals]
    cand = StrictPP(coarser.current, vals, check=False)
    if not cand.is_compatible():
        return None
    if cand.pullback(m, f.sub.current) != f.value:
        return None
    return PPClass(coarser, cand)


def pullback_class(f: PPClass, m: StackMorphism, source) -> PPClass:
    """Pull a class back along a morphism of base stacks ``source -> f.base``."""
    src = as_bounded(source)
    if m.target is not f.base.stack:
        raise StackMismatch("pullback along a morphism with a different target")
    if not f.sub.history:
        return PPClass(Subdivision(src), f.value.pullback(m, src))
    sub = pullback_subdivision(f.sub, m, src)
    omap, lattice = [], []
    for c in range(len(sub.current.stack.objects)):
        b = sub.cell_base(c)
        gens = [m.image_point(b, g) for g in sub.cell_generators(c)]
        found = f.sub._locate_face(m.object_map[b], gens)
        if found is None:
            raise HistoryMismatch("pulled-back cell does not land in a single cell")
        t, rows = found
        omap.append(t)
        lattice.append(rows)
    cm = StackMorphism(sub.current.stack, f.sub.current.stack, tuple(omap), tuple(lattice), None)
    return PPClass(sub, f.value.pullback(cm, sub.current))


def pushforward(f: "PPClass | StrictPP", m: StackMorphism, target=None) -> "PPClass | StrictPP":
    """Brion pushforward along a relative-dimension-0 morphism.

    A :class:`StrictPP` is pushed directly.  For a :class:`PPClass` the
    stellar history is pushed to the target, pulled back, the class is
    restricted to the pulled-back subdivision and pushed cell by cell.
    """
    if isinstance(f, StrictPP):
        return pushforward_strict(f, m, target)
    tgt = as_bounded(target if target is not None else m.target)
    if f.base.stack is not m.source:
        raise StackMismatch("pushforward along a morphism with a different source")
    check_rel_dim_zero(m)
    if not f.sub.history:
        return PPClass(Subdivision(tgt), pushforward_strict(f.value, m, tgt))
    ops = []
    for b, P in f.sub.history:
        ops.append((m.object_map[b], m.image_point(b, P)))
    tsub = Subdivision(tgt).replay(ops)
    back = pullback_subdivision(tsub, m, f.base)
    fine = common_refinement(back, f.sub)
    g = restrict(f, fine)
    omap, lattice = [], []
    for c in range(len(fine.current.stack.objects)):
        b = fine.cell_base(c)
        gens = [m.image_point(b, v) for v in fine.cell_generators(c)]
        found = tsub._locate_face(m.object_map[b], gens)
        if found is None:
            raise HistoryMismatch("cell image is not contained in a single target cell")
        t, rows = found
        omap.append(t)
        lattice.append(rows)
    cm = StackMorphism(fine.current.stack, tsub.current.stack, tuple(omap), tuple(lattice), None)
    return PPClass(tsub, pushforward_strict(g.value, cm, tsub.current)).simplify()


# ------------------------------------------------------- special functions
def min_fn(stack, obj: int, rays: Iterable) -> PPClass:
    """The class of ``min`` of the coordinates of a face of ``obj``.

    ``rays`` are ray indices (or names) of ``obj`` spanning the face.  A
    single ray gives its Courant function; otherwise the face is stellarly
    subdivided at its barycenter and the value is the Courant function of
    the new ray.
    """
    b = as_bounded(stack)
    st = b.stack
    st.check_object(obj)
    names = st.objects[obj].rays
    idx = sorted({names.index(r) if isinstance(r, str) else int(r) for r in rays})
    if not idx:
        raise ValueError("min over an empty set of coordinates")
    face = st.face_arrow(obj, idx)
    tau = st.arrows[face].src
    if len(idx) == 1:
        return PPClass.strict(StrictPP.ray_function(b, tau))
    sub = Subdivision(b).stellar(tau, (1,) * len(idx))
    cur = sub.current.stack
    new_ray = None
    for c in range(len(cur.objects)):
        if cur.objects[c].dim == 1 and sub.to_base.object_map[c] == tau:
            new_ray = c
    return PPClass(sub, StrictPP.ray_function(sub.current, new_ray))


# ------------------------------------------------------------ degree bases
def degree_basis(stack, d: int, homological: bool = False) -> list:
    """Basis of the degree-``d`` strict (or homological) piecewise polynomials.

    The compatibility system only equates coefficients across arrows (and
    sets boundary coefficients to zero), so its solution space is computed
    exactly by merging equated unknowns.
    """
    b = as_bounded(stack)
    st = b.stack
    unknowns = {}
    keys = []
    for o, obj in enumerate(st.objects):
        for m in _monomials(obj.rays, d):
            unknowns[(o, m)] = len(keys)
            keys.append((o, m))
    parent = list(range(len(keys)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for a in st.arrows:
        src, dst = st.objects[a.src], st.objects[a.dst]
        ren = {src.rays[i]: dst.rays[r] for i, r in enumerate(a.ray_map)}
        for m in _monomials(src.rays, d):
            mm = tuple(sorted(((ren[v], e) for v, e in m), key=lambda q: var_key(q[0])))
            union(unknowns[(a.src, m)], unknowns[(a.dst, mm)])
    dead = set()
    if homological:
        for o in b.boundary:
            for m in _monomials(st.objects[o].rays, d):
                dead.add(find(unknowns[(o, m)]))
    classes = {}
    for i in range(len(keys)):
        r = find(i)
        if r not in dead:
            classes.setdefault(r, []).append(i)
    out = []
    for r in sorted(classes):
        vals = [dict() for _ in st.objects]
        for i in classes[r]:
            o, m = keys[i]
            vals[o][m] = 1
        out.append(StrictPP(b, [Poly(v) for v in vals], check=False))
    return out
