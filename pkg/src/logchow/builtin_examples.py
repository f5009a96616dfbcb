"""Built-in reference examples with known answers.

Each example is a named check returning ``(passed, detail)``; the CLI verb
``paper-examples`` runs all of them.  They are small, exact and
deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from .conestack import (StackMorphism, a2z2_stack, faces_stack, generic_structures_over_zero, point_stack,
                        star, star_subdivide, validate)
from .exactalg import Poly
from .genus0 import boundary_divisor, log_chow_equal, wdvv_generators
from .logstrata import (LogElem, genus1_witness_graph, kernel_witness_genus1, push_to_log_pp,
                        vertex_function)
from .piecewise import StrictPP, Subdivision, degree_basis, min_fn, pushforward_strict
from .stablegraphs import aut_order, delta, graph_star, moduli_cone_stack
from .stratalgebra import StrataElem, psi_as_boundary


def quadrant_to_a2z2() -> tuple:
    """The quotient map from the quadrant to the quadrant modulo the swap."""
    F = faces_stack(["x", "y"]).stack
    Q = a2z2_stack()
    omap, lat = [], []
    for o in F.objects:
        d = o.dim
        omap.append(d)
        lat.append(tuple(tuple(int(i == j) for j in range(d)) if d != 1 else (1,) for i in range(d)))
    return F, Q, StackMorphism(F, Q, tuple(omap), tuple(lat), None)


def _poly(s: str) -> Poly:
    return Poly.parse(s)


# ---------------------------------------------------------------- checks
def ex_brion_swap():
    F, Q, m = quadrant_to_a2z2()
    top = 3
    out = {}
    for s in ("x", "y", "x*y"):
        f = StrictPP.from_values(F, {top: s})
        out[s] = pushforward_strict(f, m, Q).values[2]
    ok = out["x"] == _poly("x + y") and out["y"] == _poly("x + y") and out["x*y"] == _poly("2*x*y")
    return ok, {k: str(v) for k, v in out.items()}


def ex_brion_point():
    B, P = point_stack(2), point_stack(1)
    m = StackMorphism(B, P, (0,), ((),), (0, 0))
    v = pushforward_strict(StrictPP.const(B, 1), m, P).values[0]
    return v == Poly.const(Fraction(1, 2)), str(v)


def ex_barycentric():
    F = faces_stack(["x", "y"])
    mn = min_fn(F, 3, ["x", "y"])
    sub = mn.sub
    vals = {}
    vals["min"] = pushforward_strict(mn.value, sub.to_base, F).values[3]
    vals["min^2"] = pushforward_strict((mn * mn).value, sub.to_base, F).values[3]
    cur = sub.current.stack
    cell_values = {}
    for c, o in enumerate(cur.objects):
        if o.dim == 2:
            gens = sub.cell_generators(c)
            # the cell containing the x axis gets x(y - x), the other y(x - y)
            cell_values[c] = Poly.parse("b1*x") if (1, 0) in gens else Poly.parse("b1*y")
    hom = StrictPP.from_values(sub.current, cell_values)
    vals["hom"] = pushforward_strict(hom, sub.to_base, F).values[3]
    ok = vals["min"].is_zero() and vals["min^2"] == _poly("-x*y") and vals["hom"] == _poly("2*x*y")
    ok = ok and hom.is_homological()
    return ok, {k: str(v) for k, v in vals.items()}


def ex_triple_axis():
    F = faces_stack(["x", "y", "z"], boundary=[(), ("x",), ("y",), ("z",)])
    basis = degree_basis(F, 2, homological=True)
    top = max(range(len(F.stack.objects)), key=lambda o: F.stack.objects[o].dim)
    tops = sorted(str(b.values[top]) for b in basis)
    return tops == ["x*y", "x*z", "y*z"], tops


def ex_a2z2_valid():
    r = validate(a2z2_stack())
    st = a2z2_stack()
    ok = r.ok and len(st.homs(1, 2)) == 2 and st.aut_order(2) == 2
    return ok, {"valid": r.ok, "rho->sigma": len(st.homs(1, 2)), "|Aut sigma|": st.aut_order(2)}


def ex_a2z2_star_sigma():
    b, _ = star(a2z2_stack(), 2)
    ok = len(b.stack.objects) == 4 and len(b.interior) == 1
    return ok, {"objects": len(b.stack.objects), "interior": len(b.interior)}


def ex_a2z2_star_rho():
    b, _ = star(a2z2_stack(), 1)
    ok = len(b.stack.objects) == 4 and len(b.interior) == 2 and len(b.boundary) == 2
    return ok, {"objects": len(b.stack.objects), "interior": len(b.interior)}


def ex_a2z2_star_subdivision():
    b, _ = star_subdivide(a2z2_stack(), 2)
    st = b.stack
    auts = sorted((o.name, st.aut_order(i)) for i, o in enumerate(st.objects))
    ray = [i for i, o in enumerate(st.objects) if o.dim == 1 and "b" in o.rays]
    ok = (len(st.objects) == 4 and sum(1 for _, a in auts if a == 2) == 1
          and all(st.aut_order(i) == 1 for i in range(len(st.objects)) if i not in ray) and
          all(st.aut_order(i) == 2 for i in ray))
    return ok, auts


def ex_disjoint_generic():
    M = moduli_cone_stack(0, 5)
    a, b = M.index[delta(5, {1, 2})], M.index[delta(5, {1, 3})]
    gs = generic_structures_over_zero(M, a, b)
    return gs == [], len(gs)


def ex_disjoint_strata():
    p = StrataElem.stratum(delta(5, {1, 2})) * StrataElem.stratum(delta(5, {1, 3}))
    return p.is_zero(), str(p)


def ex_self_intersection():
    D = delta(5, {1, 2})
    p = StrataElem.stratum(D) * StrataElem.stratum(D)
    a, b = D.edge_halfedges(0)
    ref = StrataElem.stratum(D, ((("psi", a), 1),), -1) + StrataElem.stratum(D, ((("psi", b), 1),), -1)
    return p == ref, str(p)


def ex_normalize_square():
    D = delta(5, {1, 2})
    x = LogElem.stratum(D, "l0^2")
    a, b = D.edge_halfedges(0)
    ref = LogElem.from_strata(StrataElem.stratum(D, ((("psi", a), 1),), -1)
                              + StrataElem.stratum(D, ((("psi", b), 1),), -1))
    return x == ref, str(x)


def ex_normalize_fixed():
    G = delta(6, {1, 2, 3})
    s = StrataElem.stratum(G, ((("psi", 0), 1),))
    x = LogElem.stratum(G, None, ((("psi", 0), 1),))
    return x.classical == s and x.normalize() == x, str(x)


def ex_phi_disjoint():
    M = moduli_cone_stack(0, 5)
    f = StrictPP.ray_function(M, M.index[delta(5, {1, 2})]) * StrictPP.ray_function(M, M.index[delta(5, {1, 3})])
    triv = M.graphs[0]
    x = LogElem.stratum(triv, vertex_function(triv, 0, f))
    return x.is_zero() and f.is_zero(), str(x)


def ex_log_disjoint():
    p = LogElem.stratum(delta(5, {1, 2}), "l0") * LogElem.stratum(delta(5, {1, 3}), "l0")
    return p.is_zero(), str(p)


def ex_aut_gamma0():
    G = genus1_witness_graph()
    return aut_order(G) == 2, aut_order(G)


def ex_stellar_gamma0():
    M = moduli_cone_stack(1, 3)
    G = genus1_witness_graph()
    s = M.index[G]
    sub = Subdivision(M).stellar(s, (1, 1))
    return len(sub.history) == 1 and sub.history[0] == (s, (1, 1)), [list(h) for h in sub.history]


def ex_star_gamma0():
    G = genus1_witness_graph()
    st = graph_star(G)
    m = st.to_moduli()
    ok = st.vertex_types == ((0, 4), (0, 3)) or st.vertex_types == ((0, 3), (0, 4))
    ok = ok and not m.check()
    return ok, {"objects": len(st.stack.objects), "vertex types": list(st.vertex_types)}


def ex_min3():
    F = faces_stack(["x1", "x2", "x3"])
    mn = min_fn(F, len(F.stack.objects) - 1, ["x1", "x2", "x3"])
    cur = mn.sub.current.stack
    vals = {}
    for c, o in enumerate(cur.objects):
        if o.dim == 1:
            gen = mn.sub.cell_generators(c)[0]
            vals[str(gen)] = str(mn.value.values[c])
    new = [c for c, o in enumerate(cur.objects) if o.dim == 1 and mn.sub.cell_generators(c)[0] == (1, 1, 1)]
    ok = len(new) == 1 and mn.value.values[new[0]] == Poly.var(cur.objects[new[0]].rays[0])
    ok = ok and all(mn.value.values[c].is_zero() for c, o in enumerate(cur.objects)
                    if o.dim == 1 and c not in new)
    return ok, vals


def ex_wdvv_pullback():
    G = genus1_witness_graph()
    st = graph_star(G)
    v = next(i for i, t in enumerate(st.vertex_types) if t == (0, 4))
    f = vertex_function(G, v, wdvv_generators(4)[0].value)
    nonzero = sorted({str(x) for x in f.values if not x.is_zero()})
    ok = f.is_compatible() and len(nonzero) >= 2 and not f.is_zero()
    return ok, nonzero


def ex_witness():
    w = kernel_witness_genus1()
    return w["ok"], {k: w[k] for k in ("homological", "not_strict", "matches_cellwise")}


def ex_push_min_gamma0():
    G = genus1_witness_graph()
    st = graph_star(G)
    mn = min_fn(st.bounded, st.top_trivial, ["l0", "l1"])
    p = push_to_log_pp(LogElem(1, 3, nonstrict={(G, ()): mn}))
    cur = p.sub.current.stack
    supported = {}
    for c, o in enumerate(cur.objects):
        if o.dim == 1 and not p.value.values[c].is_zero():
            supported[o.name] = p.value.values[c]
    # the value at the generator of the new ray, per point of M_Gamma0
    # (the gluing map has degree |Aut Gamma0| onto its image)
    ok = len(supported) == 1
    val = None
    if ok:
        name, poly = next(iter(supported.items()))
        val = poly.linear_coefficients()
        val = next(iter(val.values())) / aut_order(G)
        ok = val == 1 and p.degree == 1
    return ok, {"supported rays": list(supported), "value / |Aut|": str(val)}


def ex_wdvv_n4():
    gens = wdvv_generators(4)
    ok = (len(gens) == 2
          and gens[0].value == boundary_divisor(4, {1, 2}) - boundary_divisor(4, {1, 3})
          and gens[1].value == boundary_divisor(4, {1, 3}) - boundary_divisor(4, {1, 4}))
    return ok, [str(g.value) for g in gens]


def ex_wdvv_equal():
    ok = log_chow_equal(boundary_divisor(4, {1, 2}), boundary_divisor(4, {1, 3}))
    return ok, ok


def ex_psi_boundary():
    d = psi_as_boundary(4, 1, 2, 3)
    return d == StrataElem.stratum(delta(4, {1, 4})), str(d)


def random_strata(rng, g: int, n: int, max_terms: int = 2, max_edges: int = 1) -> StrataElem:
    """A small random element of the strata algebra (undecorated or with
    one psi on a leg)."""
    M = moduli_cone_stack(g, n)
    cand = [t for t, G in enumerate(M.graphs) if G.num_edges <= max_edges]
    total = StrataElem.zero(g, n)
    for _ in range(rng.randint(1, max_terms)):
        t = rng.choice(cand)
        G = M.graphs[t]
        deco = ()
        if rng.random() < 0.3:
            deco = ((("psi", rng.randrange(n)), 1),)
        total = total + StrataElem.stratum(G, deco, rng.randint(-2, 2) or 1)
    return total


def ex_random_homomorphism(seed: int = 0, cases: int = 5):
    import random
    rng = random.Random(seed)
    for _ in range(cases):
        a, b = random_strata(rng, 0, 5), random_strata(rng, 0, 5)
        lhs = LogElem.from_strata(a * b)
        rhs = LogElem.from_strata(a) * LogElem.from_strata(b)
        if lhs != rhs:
            return False, {"a": str(a), "b": str(b)}
    return True, {"seed": seed, "cases": cases}


EXAMPLES: list = [
    ("brion-swap", "x, y -> x+y and xy -> 2xy under the quotient by the swap", ex_brion_swap),
    ("brion-point", "1 -> 1/2 under B(Z/2) -> point", ex_brion_point),
    ("barycentric", "barycentric coarsening: hom -> 2xy, min -> 0, min^2 -> -xy", ex_barycentric),
    ("triple-axis", "homological degree-2 basis is {xy, xz, yz}", ex_triple_axis),
    ("a2z2-stack", "whitney umbrella stack validates with two rho -> sigma", ex_a2z2_valid),
    ("a2z2-star-sigma", "star at sigma is Faces(R^2)", ex_a2z2_star_sigma),
    ("a2z2-star-rho", "star at rho: 4 objects, 2 interior", ex_a2z2_star_rho),
    ("a2z2-star-subdivision", "star subdivision at sigma: 4 classes, Z/2 on the new ray", ex_a2z2_star_subdivision),
    ("disjoint-generic", "no generic structure for disjoint divisors", ex_disjoint_generic),
    ("disjoint-strata", "[d12][d13] = 0 in the strata algebra", ex_disjoint_strata),
    ("self-intersection", "[d]^2 = [d, -psi - psi']", ex_self_intersection),
    ("normalize-square", "[d, l^2, 1] = [d, l, -psi - psi']", ex_normalize_square),
    ("normalize-fixed", "[G, F_G, gamma] is the classical stratum", ex_normalize_fixed),
    ("phi-disjoint", "a monomial on disjoint rays is zero", ex_phi_disjoint),
    ("log-disjoint", "log product of disjoint divisors is zero", ex_log_disjoint),
    ("aut-gamma0", "the two-edge genus-1 graph has |Aut| = 2", ex_aut_gamma0),
    ("stellar-gamma0", "stellar subdivision at l1 = l2 in Sigma_{1,3}", ex_stellar_gamma0),
    ("star-gamma0", "star of the genus-1 graph: Sigma_{0,4} x Sigma_{0,3} x Faces(R^2)", ex_star_gamma0),
    ("min-fn", "min(x1,x2,x3) is 1 on the barycenter ray and 0 on the others", ex_min3),
    ("wdvv-pullback", "WDVV generator pulled back to the star is non-constant", ex_wdvv_pullback),
    ("kernel-witness", "genus-1 witness: homological, not strict, cellwise equal", ex_witness),
    ("push-min-gamma0", "pushforward of min(l0,l1) is supported on the new ray", ex_push_min_gamma0),
    ("wdvv-n4", "n=4 WDVV generators", ex_wdvv_n4),
    ("wdvv-equal", "D_{12|34} = D_{13|24} modulo WDVV", ex_wdvv_equal),
    ("psi-boundary", "psi_1 = [d_{14|23}] on M_{0,4}", ex_psi_boundary),
    ("random-homomorphism", "classical-to-log embedding is multiplicative (seeded)", ex_random_homomorphism),
]


def run_examples(names=None, workers: int = 1, seed: int = 0) -> list:
    """Run the examples (all by default); returns records in a fixed order."""
    chosen = [e for e in EXAMPLES if names is None or e[0] in names]
    unknown = set(names or ()) - {e[0] for e in EXAMPLES}
    if unknown:
        raise ValueError(f"unknown example anchors: {sorted(unknown)}")
    jobs = [(e[0], seed) for e in chosen]
    if workers > 1 and len(chosen) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return results


def _run_one(job: tuple) -> dict:
    import time
    name, seed = job
    fn: Callable = next(e[2] for e in EXAMPLES if e[0] == name)
    desc = next(e[1] for e in EXAMPLES if e[0] == name)
    t = time.perf_counter()
    try:
        ok, detail = fn(seed) if name == "random-homomorphism" else fn()
        err = None
    except Exception as exc:  # reported, not raised: one failing example must not hide the others
        ok, detail, err = False, None, f"{type(exc).__name__}: {exc}"
    return {"anchor": name, "description": desc, "passed": bool(ok), "detail": _jsonable(detail),
            "error": err, "seconds": round(time.perf_counter() - t, 4)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    return str(x)
