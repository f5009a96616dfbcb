"""Cone stacks as explicit finite categories of smooth cones.

Every object of a :class:`ConeStack` is an abstract smooth cone, i.e. a copy
of a standard orthant whose coordinate rays carry names; those names double
as the polynomial variables of piecewise polynomials on the object.  An
arrow is a face embedding described by a ray map (source ray index ->
target ray index) together with an identity ``key``.  Keys let two arrows
with the same ray map be different morphisms, which is how automorphisms
acting trivially on the cone (for instance the flip of a loop in a stable
graph) are retained.

Composition follows the convention ``compose(f, g) = g o f`` (``f`` first).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Sequence

from .errors import AsymmetricSubdivision, NotEmbedded, NotInterior, NotSmooth, UnknownObject
from .exactalg import is_unimodular_system


@dataclass(frozen=True)
class Cone:
    """A cone inside an orthant, spanned by integer generator vectors."""

    ambient_rays: tuple
    generators: tuple

    @property
    def dim(self) -> int:
        return len(self.generators)

    def is_smooth(self) -> bool:
        return is_unimodular_system([list(g) for g in self.generators])

    @classmethod
    def orthant(cls, rays: Sequence[str]) -> "Cone":
        n = len(rays)
        return cls(tuple(rays), tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


@dataclass(frozen=True)
class StackObject:
    name: str
    rays: tuple
    data: Any = field(default=None, compare=False, hash=False)

    @property
    def dim(self) -> int:
        return len(self.rays)


@dataclass(frozen=True)
class Arrow:
    src: int
    dst: int
    ray_map: tuple
    key: Hashable = None


def _raymap_composer(stack: "ConeStack", f: Arrow, g: Arrow) -> Hashable:
    rm = tuple(g.ray_map[i] for i in f.ray_map)
    return (f.src, g.dst, rm)


class ConeStack:
    """Finite category of smooth cones with face arrows.

    Parameters
    ----------
    objects:
        Objects in a fixed order; indices are used everywhere else.
    arrows:
        All arrows, including identities.  When an arrow has ``key=None``
        its key defaults to ``(src, dst, ray_map)``.
    composition:
        Optional explicit table ``{(f, g): h}`` of arrow indices with
        ``h = g o f``.
    composer:
        Optional callable ``(stack, f, g) -> key`` computing the key of
        ``g o f``; the default composes ray maps, which is only valid when
        arrows are determined by their ray maps.
    """

    def __init__(self, objects: Sequence[StackObject], arrows: Sequence[Arrow],
                 composition: dict | None = None,
                 composer: Callable | None = None, name: str = ""):
        self.name = name
        self.objects = tuple(objects)
        fixed = []
        for a in arrows:
            if a.key is None:
                a = Arrow(a.src, a.dst, tuple(a.ray_map), (a.src, a.dst, tuple(a.ray_map)))
            fixed.append(a)
        self.arrows = tuple(fixed)
        self._index = {}
        for i, a in enumerate(self.arrows):
            if a.key in self._index:
                raise ValueError(f"duplicate arrow key {a.key!r}")
            self._index[a.key] = i
        self._table = dict(composition) if composition else {}
        self._explicit = composition is not None
        self._composer = composer or (None if composition is not None else _raymap_composer)
        self.hom: dict = {}
        self.out_arrows = [[] for _ in self.objects]
        self.in_arrows = [[] for _ in self.objects]
        for i, a in enumerate(self.arrows):
            self.hom.setdefault((a.src, a.dst), []).append(i)
            self.out_arrows[a.src].append(i)
            self.in_arrows[a.dst].append(i)
        self._identity = None
        self._inverse: dict = {}

    # ------------------------------------------------------------ structure
    def __len__(self) -> int:
        return len(self.objects)

    def arrow_index(self, key: Hashable) -> int:
        return self._index[key]

    def has_key(self, key: Hashable) -> bool:
        return key in self._index

    def homs(self, a: int, b: int) -> list:
        return self.hom.get((a, b), [])

    def compose(self, f: int, g: int) -> int:
        """Index of ``g o f``."""
        k = (f, g)
        r = self._table.get(k)
        if r is not None:
            return r
        af, ag = self.arrows[f], self.arrows[g]
        if af.dst != ag.src:
            raise ValueError(f"arrows {f} and {g} are not composable")
        if self._composer is None:
            raise KeyError(f"composition ({f}, {g}) missing from table")
        key = self._composer(self, af, ag)
        r = self._index.get(key)
        if r is None:
            raise KeyError(f"composite of {f} and {g} (key {key!r}) is not an arrow")
        self._table[k] = r
        return r

    @property
    def identities(self) -> tuple:
        if self._identity is None:
            ids = []
            for o in range(len(self.objects)):
                cand = [e for e in self.homs(o, o)
                        if self.arrows[e].ray_map == tuple(range(self.objects[o].dim))
                        and self._safe_compose(e, e) == e]
                if len(cand) != 1:
                    raise ValueError(f"object {o} has {len(cand)} identity candidates")
                ids.append(cand[0])
            self._identity = tuple(ids)
        return self._identity

    def _safe_compose(self, f: int, g: int):
        try:
            return self.compose(f, g)
        except (KeyError, ValueError):
            return None

    def identity(self, o: int) -> int:
        return self.identities[o]

    def aut(self, o: int) -> list:
        return self.homs(o, o)

    def aut_order(self, o: int) -> int:
        return len(self.homs(o, o))

    def inverse(self, a: int) -> int:
        if a in self._inverse:
            return self._inverse[a]
        ar = self.arrows[a]
        if ar.src != ar.dst:
            raise ValueError("only automorphisms have inverses")
        e = self.identity(ar.src)
        for b in self.aut(ar.src):
            if self.compose(a, b) == e:
                self._inverse[a] = b
                return b
        raise ValueError(f"arrow {a} is not invertible")

    def image(self, a: int) -> frozenset:
        return frozenset(self.arrows[a].ray_map)

    def check_object(self, o: int) -> None:
        if not isinstance(o, int) or not 0 <= o < len(self.objects):
            raise UnknownObject(f"{o!r} is not an object of the cone stack")

    def find_object(self, ref) -> int:
        """Resolve an object given by index or by name."""
        if isinstance(ref, int):
            self.check_object(ref)
            return ref
        for i, o in enumerate(self.objects):
            if o.name == ref:
                return i
        try:
            i = int(ref)
        except (TypeError, ValueError):
            raise UnknownObject(f"no object named {ref!r}") from None
        self.check_object(i)
        return i

    def zero_objects(self) -> list:
        return [i for i, o in enumerate(self.objects) if o.dim == 0]

    def maximal_objects(self) -> list:
        return [i for i in range(len(self.objects))
                if all(self.arrows[a].dst == i for a in self.out_arrows[i])]

    def face_arrow(self, dst: int, rays: Iterable[int]) -> int:
        """Some arrow into ``dst`` whose image is exactly the given ray set."""
        target = frozenset(rays)
        for a in self.in_arrows[dst]:
            if self.image(a) == target:
                return a
        raise UnknownObject(f"no face of object {dst} with rays {sorted(target)}")

    def __repr__(self) -> str:
        return f"ConeStack({self.name or 'unnamed'}: {len(self.objects)} objects, {len(self.arrows)} arrows)"

    # ---------------------------------------------------------- serialization
    def to_json(self, interior: Iterable[int] | None = None) -> dict:
        table = []
        for (f, g) in self.composable_pairs():
            table.append([f, g, self.compose(f, g)])
        out = {
            "objects": [{"id": i, "name": o.name, "rays": list(o.rays)} for i, o in enumerate(self.objects)],
            "arrows": [{"id": i, "src": a.src, "dst": a.dst, "rayMap": list(a.ray_map)}
                       for i, a in enumerate(self.arrows)],
            "composition": table,
        }
        out["interior"] = sorted(interior) if interior is not None else list(range(len(self.objects)))
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ConeStack":
        objs = sorted(data["objects"], key=lambda o: o["id"])
        if [o["id"] for o in objs] != list(range(len(objs))):
            raise ValueError("object ids must be 0..N-1")
        objects = [StackObject(str(o.get("name", o["id"])), tuple(o["rays"])) for o in objs]
        arrs = sorted(data["arrows"], key=lambda a: a["id"])
        arrows = [Arrow(a["src"], a["dst"], tuple(a["rayMap"]), ("arrow", a["id"])) for a in arrs]
        table = None
        if data.get("composition") is not None:
            ids = {a["id"]: i for i, a in enumerate(arrs)}
            table = {}
            for f, g, h in data["composition"]:
                table[(ids.get(f, f), ids.get(g, g))] = ids.get(h, h)
        return cls(objects, arrows, composition=table, name=data.get("name", ""))

    def composable_pairs(self):
        for f, af in enumerate(self.arrows):
            for g in self.out_arrows[af.dst]:
                yield f, g


class ConeStackWithBoundary:
    """A cone stack together with a forward-closed interior."""

    def __init__(self, stack: ConeStack, interior: Iterable[int] | None = None):
        self.stack = stack
        self.interior = frozenset(range(len(stack.objects)) if interior is None else interior)

    @property
    def boundary(self) -> frozenset:
        return frozenset(range(len(self.stack.objects))) - self.interior

    def is_forward_closed(self) -> bool:
        return all(self.stack.arrows[a].dst in self.interior
                   for o in self.interior for a in self.stack.out_arrows[o])

    def to_json(self) -> dict:
        return self.stack.to_json(self.interior)

    @classmethod
    def from_json(cls, data: dict) -> "ConeStackWithBoundary":
        st = ConeStack.from_json(data)
        return cls(st, data.get("interior"))

    def __repr__(self) -> str:
        return f"ConeStackWithBoundary({self.stack!r}, interior={sorted(self.interior)})"


def as_bounded(s) -> ConeStackWithBoundary:
    return s if isinstance(s, ConeStackWithBoundary) else ConeStackWithBoundary(s)


# ---------------------------------------------------------------- morphisms
@dataclass
class StackMorphism:
    """Functor between cone stacks with per-object integer lattice maps.

    ``lattice[o][i]`` is the image of ray ``i`` of source object ``o``,
    written as an integer vector in the coordinates of ``object_map[o]``.
    ``arrow_map`` may be ``None`` when only the objectwise data is needed.
    """

    source: ConeStack
    target: ConeStack
    object_map: tuple
    lattice: tuple
    arrow_map: tuple | None = None

    def image_point(self, o: int, point: Sequence) -> tuple:
        """Image of a point given in source-object coordinates."""
        t = self.target.objects[self.object_map[o]]
        out = [0] * t.dim
        for c, vec in zip(point, self.lattice[o]):
            if c:
                for j, v in enumerate(vec):
                    out[j] += c * v
        return tuple(out)

    def then(self, other: "StackMorphism") -> "StackMorphism":
        """Composite ``other o self``."""
        if other.source is not self.target:
            raise ValueError("morphisms are not composable")
        omap = tuple(other.object_map[t] for t in self.object_map)
        lat = []
        for o, t in enumerate(self.object_map):
            lat.append(tuple(other.image_point(t, vec) for vec in self.lattice[o]))
        amap = None
        if self.arrow_map is not None and other.arrow_map is not None:
            amap = tuple(other.arrow_map[a] for a in self.arrow_map)
        return StackMorphism(self.source, other.target, omap, tuple(lat), amap)

    def is_rel_dim_zero(self) -> bool:
        from .exactalg import rank
        return all(rank([list(v) for v in self.lattice[o]]) == self.source.objects[o].dim
                   for o in range(len(self.source.objects)))

    def check(self) -> list:
        """List of violations of functoriality and of the face condition."""
        problems = []
        src, tgt = self.source, self.target
        for o, t in enumerate(self.object_map):
            vecs = self.lattice[o]
            if len(vecs) != src.objects[o].dim:
                problems.append(f"object {o}: lattice map has wrong size")
                continue
            support = {j for v in vecs for j, x in enumerate(v) if x}
            if support != set(range(tgt.objects[t].dim)):
                problems.append(f"object {o}: image factors through a proper face of {t}")
            if any(x < 0 for v in vecs for x in v):
                problems.append(f"object {o}: lattice map leaves the cone")
        if self.arrow_map is not None:
            for a, ar in enumerate(src.arrows):
                b = self.arrow_map[a]
                br = tgt.arrows[b]
                if br.src != self.object_map[ar.src] or br.dst != self.object_map[ar.dst]:
                    problems.append(f"arrow {a}: endpoints not preserved")
                    continue
                for i in range(src.objects[ar.src].dim):
                    lhs = self.lattice[ar.dst][ar.ray_map[i]]
                    v = self.lattice[ar.src][i]
                    rhs = [0] * tgt.objects[br.dst].dim
                    for j, x in enumerate(v):
                        rhs[br.ray_map[j]] += x
                    if tuple(rhs) != tuple(lhs):
                        problems.append(f"arrow {a}: lattice maps do not commute")
                        break
            for f, g in src.composable_pairs():
                if tgt.compose(self.arrow_map[f], self.arrow_map[g]) != self.arrow_map[src.compose(f, g)]:
                    problems.append(f"arrows {f},{g}: composition not preserved")
        return problems


def identity_morphism(stack: ConeStack) -> StackMorphism:
    lat = tuple(tuple(tuple(int(i == j) for j in range(o.dim)) for i in range(o.dim)) for o in stack.objects)
    return StackMorphism(stack, stack, tuple(range(len(stack.objects))), lat,
                         tuple(range(len(stack.arrows))))


# --------------------------------------------------------------- validation
@dataclass
class ValidationReport:
    problems: list

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "problems": list(self.problems)}


def validate(stack: ConeStack, max_triples: int = 200000) -> ValidationReport:
    """Check the cone stack axioms and report every violation found."""
    problems = []
    n_arrows = len(stack.arrows)
    for i, a in enumerate(stack.arrows):
        if not (0 <= a.src < len(stack.objects) and 0 <= a.dst < len(stack.objects)):
            problems.append(f"arrow {i}: endpoint out of range")
            continue
        if len(a.ray_map) != stack.objects[a.src].dim:
            problems.append(f"arrow {i}: ray map has wrong length")
        if len(set(a.ray_map)) != len(a.ray_map) or any(
                not 0 <= r < stack.objects[a.dst].dim for r in a.ray_map):
            problems.append(f"arrow {i}: ray map is not injective into the target rays")
    if stack._explicit:
        for (f, g), h in stack._table.items():
            if not all(isinstance(x, int) and 0 <= x < n_arrows for x in (f, g, h)):
                problems.append(f"composition table entry ({f}, {g}) -> {h} references a missing arrow")
    if problems:
        return ValidationReport(problems)
    try:
        stack.identities
    except (ValueError, KeyError) as exc:
        problems.append(f"identities: {exc}")
        return ValidationReport(problems)
    for f, g in stack.composable_pairs():
        try:
            h = stack.compose(f, g)
        except (KeyError, ValueError) as exc:
            problems.append(f"composition of {f} then {g} undefined: {exc}")
            continue
        af, ag, ah = stack.arrows[f], stack.arrows[g], stack.arrows[h]
        if (ah.src, ah.dst) != (af.src, ag.dst):
            problems.append(f"composite of {f},{g} has wrong endpoints")
        elif ah.ray_map != tuple(ag.ray_map[i] for i in af.ray_map):
            problems.append(f"composite of {f},{g} has inconsistent ray map")
    if problems:
        return ValidationReport(problems)
    for o in range(len(stack.objects)):
        e = stack.identity(o)
        for a in stack.out_arrows[o]:
            if stack.compose(e, a) != a:
                problems.append(f"identity of {o} is not a left unit for arrow {a}")
        for a in stack.in_arrows[o]:
            if stack.compose(a, e) != a:
                problems.append(f"identity of {o} is not a right unit for arrow {a}")
        for a in stack.aut(o):
            try:
                stack.inverse(a)
            except ValueError:
                problems.append(f"self-arrow {a} of object {o} is not invertible")
        dim = stack.objects[o].dim
        images = {stack.image(a) for a in stack.in_arrows[o]}
        for k in range(dim + 1):
            for sub in itertools.combinations(range(dim), k):
                if frozenset(sub) not in images:
                    problems.append(f"face {sub} of object {o} is not the image of any arrow")
        data = stack.objects[o].data
        if isinstance(data, Cone) and not data.is_smooth():
            problems.append(f"object {o} is not smooth")
    count = 0
    for f, g in stack.composable_pairs():
        for h in stack.out_arrows[stack.arrows[g].dst]:
            count += 1
            if count > max_triples:
                break
            if stack.compose(stack.compose(f, g), h) != stack.compose(f, stack.compose(g, h)):
                problems.append(f"composition not associative on ({f}, {g}, {h})")
    return ValidationReport(problems)


# ------------------------------------------------------------- constructions
def faces_stack(rays: "int | Sequence[str] | Cone" = 2, boundary: Iterable | None = None) -> ConeStackWithBoundary:
    """The cone stack of faces of a smooth cone.

    Objects are ray subsets ordered by size; arrows are face inclusions.  By
    default the interior is the top cone only.  ``boundary`` may list ray
    subsets (as iterables of ray names) forming a backward-closed boundary,
    in which case the interior is its complement.
    """
    if isinstance(rays, Cone):
        if not rays.is_smooth():
            raise NotSmooth("faces_stack requires a smooth cone")
        rays = tuple(rays.ambient_rays[i] if rays.dim == len(rays.ambient_rays) else f"u{i}"
                     for i in range(rays.dim))
    if isinstance(rays, int):
        rays = ("x", "y", "z", "w")[:rays] if rays <= 4 else tuple(f"x{i}" for i in range(rays))
    rays = tuple(rays)
    d = len(rays)
    subsets = [s for k in range(d + 1) for s in itertools.combinations(range(d), k)]
    index = {s: i for i, s in enumerate(subsets)}
    objects = [StackObject("{" + ",".join(rays[i] for i in s) + "}", tuple(rays[i] for i in s)) for s in subsets]
    arrows = []
    for s in subsets:
        for t in subsets:
            if set(s) <= set(t):
                arrows.append(Arrow(index[s], index[t], tuple(t.index(i) for i in s)))
    stack = ConeStack(objects, arrows, name=f"Faces(R^{d})")
    if boundary is None:
        interior = {index[tuple(range(d))]}
    else:
        bset = set()
        for b in boundary:
            names = tuple(sorted((rays.index(r) if isinstance(r, str) else r) for r in b))
            bset.add(index[names])
        interior = set(range(len(subsets))) - bset
    res = ConeStackWithBoundary(stack, interior)
    if not res.is_forward_closed():
        raise ValueError("boundary complement is not forward-closed")
    return res


def product_stack(stacks: Sequence[ConeStack], prefixes: Sequence[str], name: str = "") -> ConeStack:
    """Cartesian product of cone stacks; rays are prefixed per factor."""
    obj_tuples = list(itertools.product(*[range(len(s.objects)) for s in stacks]))
    index = {t: i for i, t in enumerate(obj_tuples)}
    objects = []
    for t in obj_tuples:
        rays = []
        for s, p, o in zip(stacks, prefixes, t):
            rays.extend(f"{p}{r}" for r in s.objects[o].rays)
        objects.append(StackObject("(" + ",".join(s.objects[o].name for s, o in zip(stacks, t)) + ")",
                                   tuple(rays), data=t))
    arrows = []
    for src_t in obj_tuples:
        choices = [s.out_arrows[o] for s, o in zip(stacks, src_t)]
        for combo in itertools.product(*choices):
            dst_t = tuple(s.arrows[a].dst for s, a in zip(stacks, combo))
            rm = []
            off = 0
            for s, a, o in zip(stacks, combo, dst_t):
                rm.extend(off + r for r in s.arrows[a].ray_map)
                off += s.objects[o].dim
            arrows.append(Arrow(index[src_t], index[dst_t], tuple(rm), ("prod",) + tuple(combo)))

    def composer(st, f: Arrow, g: Arrow):
        return ("prod",) + tuple(s.compose(a, b) for s, a, b in zip(stacks, f.key[1:], g.key[1:]))

    return ConeStack(objects, arrows, composer=composer, name=name or " x ".join(s.name for s in stacks))


def a2z2_stack() -> ConeStack:
    """The three-object stack with two arrows from the ray into the plane
    and the coordinate swap as automorphism of the plane; also the cone
    stack of the quadrant modulo the swap."""
    objects = [StackObject("0", ()), StackObject("rho", ("r",)), StackObject("sigma", ("x", "y"))]
    arrows = [
        Arrow(0, 0, ()), Arrow(1, 1, (0,)), Arrow(2, 2, (0, 1)),
        Arrow(0, 1, ()), Arrow(0, 2, ()),
        Arrow(1, 2, (0,)), Arrow(1, 2, (1,)),
        Arrow(2, 2, (1, 0)),
    ]
    return ConeStack(objects, arrows, name="a2z2")


def point_stack(aut_order: int = 1) -> ConeStack:
    """A single zero-dimensional cone with cyclic automorphism group."""
    objects = [StackObject("pt", ())]
    arrows = [Arrow(0, 0, (), ("c", k)) for k in range(aut_order)]
    table = {(i, j): (i + j) % aut_order for i in range(aut_order) for j in range(aut_order)}
    return ConeStack(objects, arrows, composition=table, name=f"B(Z/{aut_order})" if aut_order > 1 else "pt")


def orthant_stack(rays: Sequence[str] = ("x", "y")) -> ConeStack:
    return faces_stack(rays).stack


# -------------------------------------------------------------- group helpers
def _orbit_rep(stack: ConeStack, items: Iterable, act: Callable) -> dict:
    """Partition ``items`` into orbits under ``act``; map each item to the
    minimal element of its orbit."""
    rep = {}
    for it in sorted(items):
        if it in rep:
            continue
        orbit = act(it)
        m = min(orbit)
        for x in orbit:
            rep[x] = m
    return rep


# ------------------------------------------------------------------- star
@dataclass(frozen=True)
class StarDiagram:
    """A diagram ``center -> mid <- cone`` in the ambient stack."""

    j1: int
    mid: int
    j2: int
    cone: int


def star(stack: ConeStack, sigma) -> tuple:
    """Star cone stack of ``sigma`` with its boundary and projection.

    Objects are isomorphism classes of diagrams ``sigma -> s' <- s''`` whose
    middle term is jointly covered by the two images; the cone of such an
    object is ``s''``.  Morphisms are pairs ``(phi', phi'')`` making the
    obvious squares commute.  The interior consists of the diagrams with
    ``s'' -> s'`` invertible.  Returns ``(ConeStackWithBoundary, StackMorphism)``.
    """
    sigma = stack.find_object(sigma)
    diagrams = []
    for j1 in stack.out_arrows[sigma]:
        mid = stack.arrows[j1].dst
        full = frozenset(range(stack.objects[mid].dim))
        im1 = stack.image(j1)
        for j2 in stack.in_arrows[mid]:
            if im1 | stack.image(j2) == full:
                diagrams.append((j1, j2))
    groups = {}
    for j1, j2 in diagrams:
        mid = stack.arrows[j1].dst
        cone = stack.arrows[j2].src
        groups.setdefault((mid, cone), []).append((j1, j2))

    reps = []
    for (mid, cone), items in sorted(groups.items()):
        a_mid, a_cone = stack.aut(mid), stack.aut(cone)
        inv_cone = [stack.inverse(b) for b in a_cone]

        def act(item, mid=mid, a_mid=a_mid, inv_cone=inv_cone):
            j1, j2 = item
            out = set()
            for a in a_mid:
                n1 = stack.compose(j1, a)
                for binv in inv_cone:
                    out.add((n1, stack.compose(stack.compose(binv, j2), a)))
            return out

        repmap = _orbit_rep(stack, items, act)
        for r in sorted(set(repmap.values())):
            reps.append(StarDiagram(r[0], mid, r[1], cone))
    objects = []
    for d in reps:
        co = stack.objects[d.cone]
        objects.append(StackObject(f"{stack.objects[sigma].name}->{stack.objects[d.mid].name}<-{co.name}[{d.j1},{d.j2}]",
                                   co.rays, data=d))
    arrows = []
    for i1, d1 in enumerate(reps):
        for i2, d2 in enumerate(reps):
            for p1 in stack.homs(d1.mid, d2.mid):
                if stack.compose(d1.j1, p1) != d2.j1:
                    continue
                lhs = stack.compose(d1.j2, p1)
                for p2 in stack.homs(d1.cone, d2.cone):
                    if lhs == stack.compose(p2, d2.j2):
                        arrows.append(Arrow(i1, i2, stack.arrows[p2].ray_map, ("star", i1, i2, p1, p2)))

    def composer(st, f: Arrow, g: Arrow):
        return ("star", f.key[1], g.key[2], stack.compose(f.key[3], g.key[3]), stack.compose(f.key[4], g.key[4]))

    st = ConeStack(objects, arrows, composer=composer, name=f"Star_{stack.objects[sigma].name}({stack.name})")
    interior = [i for i, d in enumerate(reps) if d.cone == d.mid and stack.arrows[d.j2].src == stack.arrows[d.j2].dst]
    lat = tuple(tuple(tuple(int(i == j) for j in range(o.dim)) for i in range(o.dim)) for o in objects)
    amap = tuple(a.key[4] for a in st.arrows)
    morph = StackMorphism(st, stack, tuple(d.cone for d in reps), lat, amap)
    return ConeStackWithBoundary(st, interior), morph


# ------------------------------------------------------- generic structures
@dataclass(frozen=True)
class GenericStructure:
    target: int
    phi1: int
    phi2: int
    aut_order: int


def generic_structures(stack: ConeStack, f1: int, f2: int, max_dim: int | None = None) -> list:
    """Isomorphism classes of commuting, jointly covering squares.

    ``f1: s -> s1`` and ``f2: s -> s2`` are arrows with a common source.  The
    result lists triples ``(s', phi1: s1 -> s', phi2: s2 -> s')`` with
    ``phi1 o f1 = phi2 o f2`` and every ray of ``s'`` hit by ``phi1`` or
    ``phi2``, one per isomorphism class, each with the order of its
    stabilizer.
    """
    a1, a2 = stack.arrows[f1], stack.arrows[f2]
    if a1.src != a2.src:
        raise ValueError("generic structures need arrows with a common source")
    s1, s2 = a1.dst, a2.dst
    bound = stack.objects[s1].dim + stack.objects[s2].dim
    if max_dim is not None:
        bound = min(bound, max_dim)
    out = []
    targets = {stack.arrows[p].dst for p in stack.out_arrows[s1]}
    for t in sorted(targets):
        if stack.objects[t].dim > bound:
            continue
        full = frozenset(range(stack.objects[t].dim))
        cands = []
        for p1 in stack.homs(s1, t):
            c1 = stack.compose(f1, p1)
            im1 = stack.image(p1)
            for p2 in stack.homs(s2, t):
                if im1 | stack.image(p2) == full and stack.compose(f2, p2) == c1:
                    cands.append((p1, p2))
        if not cands:
            continue
        auts = stack.aut(t)
        seen = set()
        for c in sorted(cands):
            if c in seen:
                continue
            orbit = [(stack.compose(c[0], a), stack.compose(c[1], a)) for a in auts]
            seen.update(orbit)
            stab = sum(1 for o in orbit if o == c)
            out.append(GenericStructure(t, c[0], c[1], stab))
    return out


def generic_structures_over_zero(stack: ConeStack, s1: int, s2: int) -> list:
    """Generic structures over the (unique) zero-dimensional object."""
    zeros = stack.zero_objects()
    for z in zeros:
        h1, h2 = stack.homs(z, s1), stack.homs(z, s2)
        if h1 and h2:
            return generic_structures(stack, h1[0], h2[0])
    raise UnknownObject("no zero cone mapping to both objects")


# ----------------------------------------------------------- subdivisions
def is_embedded(stack: ConeStack, sigma: int) -> bool:
    """Whether the interior of the star of ``sigma`` modulo Aut(sigma) maps
    fully faithfully onto a full subcategory.

    Equivalently: for all arrows ``j1: sigma -> s1``, ``j2: sigma -> s2`` and
    every ``phi: s1 -> s2`` there is exactly one automorphism ``a`` of
    ``sigma`` with ``phi o j1 = j2 o a``.
    """
    auts = stack.aut(sigma)
    outs = stack.out_arrows[sigma]
    for j1 in outs:
        s1 = stack.arrows[j1].dst
        for j2 in outs:
            s2 = stack.arrows[j2].dst
            homs = stack.homs(s1, s2)
            if not homs:
                continue
            comps = [stack.compose(a, j2) for a in auts]
            for phi in homs:
                lhs = stack.compose(j1, phi)
                if sum(1 for c in comps if c == lhs) != 1:
                    return False
    return True


@dataclass(frozen=True)
class Cell:
    """A cone of a stellar subdivision of an object.

    ``base`` is the subdivided object; ``generators`` are integer vectors in
    its coordinates (the stellar point first when present).
    """

    base: int
    generators: tuple
    pointed: bool
    face: tuple = ()


def _fresh_name(taken: Iterable[str], stem: str) -> str:
    taken = set(taken)
    name = stem
    k = 1
    while name in taken:
        k += 1
        name = f"{stem}_{k}"
    return name


def stellar_subdivide(stack, tau: int, point: Sequence[int] | None = None,
                      new_ray: str = "b") -> tuple:
    """Stellar subdivision at a point of the relative interior of ``tau``.

    The point is transported along every arrow out of ``tau``; each object
    receiving points must receive exactly one (otherwise
    :class:`AsymmetricSubdivision`).  Cells of a subdivided object are the
    cones spanned by the point and the faces not containing the support of
    the point.  Returns ``(ConeStackWithBoundary, StackMorphism)`` where the
    morphism sends each cell to the object it subdivides.
    """
    bounded = as_bounded(stack)
    st = bounded.stack
    st.check_object(tau)
    dim_tau = st.objects[tau].dim
    if point is None:
        point = (1,) * dim_tau
    point = tuple(int(x) for x in point)
    if len(point) != dim_tau or any(x <= 0 for x in point):
        raise NotInterior(f"point {point} is not in the relative interior of object {tau}")
    if dim_tau == 0:
        raise NotInterior("cannot subdivide at the apex")
    if any(x != 1 for x in point):
        raise NotSmooth(f"stellar subdivision at {point} creates a non-smooth cone")

    points = {}
    for j in st.out_arrows[tau]:
        a = st.arrows[j]
        vec = [0] * st.objects[a.dst].dim
        for i, r in enumerate(a.ray_map):
            vec[r] = point[i]
        points.setdefault(a.dst, set()).add(tuple(vec))
    for o, ps in points.items():
        if len(ps) > 1:
            raise AsymmetricSubdivision(
                f"the orbit of the stellar point meets object {o} ({st.objects[o].name}) in {len(ps)} points")
    center = {o: next(iter(ps)) for o, ps in points.items()}

    cells = []
    cell_objects = []
    for o, obj in enumerate(st.objects):
        if o not in center:
            gens = tuple(tuple(int(i == j) for j in range(obj.dim)) for i in range(obj.dim))
            cells.append(Cell(o, gens, False, tuple(range(obj.dim))))
            cell_objects.append(StackObject(obj.name, obj.rays, data=cells[-1]))
            continue
        q = center[o]
        support = tuple(i for i, x in enumerate(q) if x)
        rest = tuple(i for i in range(obj.dim) if not q[i])
        auts = st.aut(o)
        seen = set()
        faces = [fs for k in range(len(support)) for fs in itertools.combinations(support, k)]
        qname = _fresh_name(obj.rays, new_ray)
        for fs in faces:
            if fs in seen:
                continue
            orbit = {tuple(sorted(st.arrows[a].ray_map[i] for i in fs)) for a in auts}
            seen.update(orbit)
            rep = min(orbit)
            kept = tuple(sorted(rest + rep))
            gens = (q,) + tuple(tuple(int(i == j) for j in range(obj.dim)) for i in kept)
            if not is_unimodular_system([list(g) for g in gens]):
                raise NotSmooth(f"cell over object {o} is not smooth")
            cell = Cell(o, gens, True, kept)
            cells.append(cell)
            cell_objects.append(StackObject(f"{obj.name}/{qname}+{{{','.join(obj.rays[i] for i in kept)}}}",
                                            (qname,) + tuple(obj.rays[i] for i in kept), data=cell))
    by_base = {}
    for i, c in enumerate(cells):
        by_base.setdefault(c.base, []).append(i)

    arrows = []
    for i1, c1 in enumerate(cells):
        for a in st.out_arrows[c1.base]:
            ar = st.arrows[a]
            img = []
            if c1.pointed:
                img.append(("q",))
            img.extend(("r", ar.ray_map[i]) for i in c1.face)
            for i2 in by_base[ar.dst]:
                c2 = cells[i2]
                gen_pos = {}
                if c2.pointed:
                    gen_pos[("q",)] = 0
                off = 1 if c2.pointed else 0
                for p, r in enumerate(c2.face):
                    gen_pos[("r", r)] = off + p
                if all(g in gen_pos for g in img):
                    arrows.append(Arrow(i1, i2, tuple(gen_pos[g] for g in img), ("sub", a, i1, i2)))

    def composer(s, f: Arrow, g: Arrow):
        return ("sub", st.compose(f.key[1], g.key[1]), f.key[2], g.key[3])

    new = ConeStack(cell_objects, arrows, composer=composer, name=f"{st.name}*")
    lattice = tuple(c.generators for c in cells)
    morph = StackMorphism(new, st, tuple(c.base for c in cells), lattice, tuple(a.key[1] for a in new.arrows))
    interior = [i for i, c in enumerate(cells) if c.base in bounded.interior]
    return ConeStackWithBoundary(new, interior), morph


def star_subdivide(stack, sigma) -> tuple:
    """Star subdivision (combinatorial blowup) at an object.

    Requires the embedding criterion of :func:`is_embedded`; otherwise
    raises :class:`NotEmbedded`.  It is the stellar subdivision at the
    barycenter (sum of rays) of ``sigma``.
    """
    bounded = as_bounded(stack)
    st = bounded.stack
    sigma = st.find_object(sigma)
    if not is_embedded(st, sigma):
        raise NotEmbedded(f"the star of {st.objects[sigma].name} does not embed; star subdivision undefined")
    if st.objects[sigma].dim == 0:
        raise NotInterior("cannot star-subdivide at the apex")
    return stellar_subdivide(bounded, sigma, None)


def lattice_columns(m: StackMorphism, o: int) -> list:
    """Matrix (rows = target coordinates) of the lattice map of ``o``."""
    vecs = m.lattice[o]
    t = m.target.objects[m.object_map[o]].dim
    return [[Fraction(vecs[i][j]) for i in range(len(vecs))] for j in range(t)]
