"""Random small objects for the property suites (driven by random.Random)."""

from fractions import Fraction

from logchow.builtin_examples import quadrant_to_a2z2
from logchow.conestack import a2z2_stack, faces_stack
from logchow.exactalg import Poly
from logchow.logstrata import LogElem, edge_function, vertex_function
from logchow.piecewise import PPClass, StrictPP, Subdivision, min_fn
from logchow.stablegraphs import graph_star, moduli_cone_stack
from logchow.stratalgebra import StrataElem

_A2Z2 = a2z2_stack()
_STACKS = {
    "faces2": faces_stack(2),
    "faces3": faces_stack(3),
    "a2z2": _A2Z2,
    "m05": moduli_cone_stack(0, 5),
    "m12": moduli_cone_stack(1, 2),
}


def stack_names():
    return sorted(_STACKS)


def get_stack(name):
    return _STACKS[name]


def random_strict(rng, stack, max_deg=2, terms=3) -> StrictPP:
    """Random compatible function: a combination of products of ray functions."""
    st = stack.stack if hasattr(stack, "stack") else stack
    rays = [o for o, obj in enumerate(st.objects) if obj.dim == 1]
    total = StrictPP.zero(stack)
    for _ in range(rng.randint(1, terms)):
        f = StrictPP.const(stack, rng.randint(-3, 3))
        for _ in range(rng.randint(0, max_deg)):
            f = f * StrictPP.ray_function(stack, rng.choice(rays))
        total = total + f
    return total


def random_value(rng, names, max_deg=2) -> Poly:
    p = Poly.zero()
    for _ in range(rng.randint(1, 3)):
        p = p + Poly.monomial({v: rng.randint(0, max_deg) for v in rng.sample(list(names), min(2, len(names)))},
                              rng.randint(-3, 3) or 1)
    return p


def random_strata(rng, g, n, max_terms=2, max_edges=2, kappa=True) -> StrataElem:
    M = moduli_cone_stack(g, n)
    cand = [t for t, G in enumerate(M.graphs) if G.num_edges <= max_edges]
    total = StrataElem.zero(g, n)
    for _ in range(rng.randint(1, max_terms)):
        G = M.graphs[rng.choice(cand)]
        deco = ()
        r = rng.random()
        if r < 0.3:
            deco = ((("psi", rng.randrange(G.num_halfedges)), 1),)
        elif r < 0.4 and kappa:
            deco = ((("kappa", rng.randrange(G.num_vertices), 1), 1),)
        total = total + StrataElem.stratum(G, deco, Fraction(rng.randint(-3, 3) or 1, rng.choice([1, 2])))
    return total


def _edge_poly(rng, G) -> str:
    terms = []
    for _ in range(rng.randint(1, 2)):
        m = "*".join(f"l{e}^{rng.randint(1, 2)}" for e in range(G.num_edges))
        terms.append(f"{rng.randint(-2, 2) or 1}*{m}")
    return " + ".join(terms)


def random_log_term(rng, g, n):
    """A raw term ``(G, deco, class, coeff)`` with a homological class."""
    M = moduli_cone_stack(g, n)
    cand = [G for G in M.graphs if 1 <= G.num_edges <= 2]
    G = rng.choice(cand)
    st = graph_star(G)
    f = PPClass.strict(edge_function(G, _edge_poly(rng, G)))
    r = rng.random()
    if r < 0.3:
        # a boundary divisor of one vertex moduli space
        v = rng.randrange(G.num_vertices)
        Mv = st.factors[v]
        rays = [o for o, obj in enumerate(Mv.objects) if obj.dim == 1]
        if rays:
            f = f * PPClass.strict(vertex_function(G, v, StrictPP.ray_function(Mv, rng.choice(rays))))
    elif r < 0.6 and G.num_edges == 2:
        f = min_fn(st.bounded, st.top_trivial, ["l0", "l1"]) * PPClass.strict(
            edge_function(G, rng.choice(["1", "l0", "l1", "l0 + 2*l1"])))
    deco = ()
    if rng.random() < 0.2:
        deco = ((("psi", rng.randrange(G.n)), 1),)
    return G, deco, f, Fraction(rng.randint(-2, 2) or 1)


def random_log(rng, g, n) -> LogElem:
    from logchow.logstrata import normalize_terms
    terms = [random_log_term(rng, g, n) for _ in range(rng.randint(1, 2))]
    x = normalize_terms(g, n, terms)
    if rng.random() < 0.5:
        x = x + LogElem.from_strata(random_strata(rng, g, n, max_edges=1, kappa=False))
    return x


def random_subdivision(rng, F):
    """One or two stellar operations on a faces stack."""
    sub = Subdivision(F)
    for _ in range(rng.randint(1, 2)):
        cur = sub.current.stack
        cells = [c for c, o in enumerate(cur.objects) if o.dim >= 2]
        sub = sub.stellar_at(rng.choice(cells))
    return sub


def quadrant_quotient():
    return quadrant_to_a2z2()
