"""Piecewise polynomials, subdivisions and Brion pushforward."""

from fractions import Fraction

import pytest

from logchow.builtin_examples import quadrant_to_a2z2
from logchow.conestack import StackMorphism, identity_morphism, a2z2_stack, faces_stack, point_stack
from logchow.errors import HistoryMismatch, IncompatiblePP, NotRelDimZero, StackMismatch
from logchow.exactalg import Poly
from logchow.piecewise import (PPClass, StrictPP, Subdivision, common_refinement, degree_basis, descend, min_fn,
                               pullback, pushforward, pushforward_strict, restrict)
from logchow.stablegraphs import moduli_cone_stack

P = Poly.parse


def top(F):
    return len(F.stack.objects) - 1


def test_from_values_fills_faces_by_restriction():
    F = faces_stack(2)
    f = StrictPP.from_values(F, {3: "x^2 + 3*x*y - y"})
    names = {o.name: v for o, v in zip(F.stack.objects, f.values)}
    assert names["{x}"] == P("x^2") and names["{y}"] == P("-y") and names["{}"] == Poly.zero()


def test_incompatible_values_rejected():
    F = faces_stack(2)
    vals = [Poly.zero(), P("x"), P("y"), P("x + 2*y")]
    with pytest.raises(IncompatiblePP):
        StrictPP(F, vals)
    f = StrictPP(F, vals, check=False)
    assert not f.is_compatible()
    assert len(f.compatibility_problems()) == 1


def test_ray_functions_in_a2z2_account_for_both_sides():
    st = a2z2_stack()
    r = StrictPP.ray_function(st, 1)
    assert r.values[2] == P("x + y")
    assert r.is_compatible()


def test_homological_and_degree():
    F = faces_stack(2)
    f = StrictPP.from_values(F, {3: "x*y"})
    assert f.is_homological() and f.degree == 2 and f.is_homogeneous(2)
    assert not StrictPP.from_values(F, {3: "x"}).is_homological()


def test_brion_pushforward_quadrant_to_swap_quotient():
    Fq, Q, m = quadrant_to_a2z2()
    assert not m.check()
    for src, expected in [("x", "x + y"), ("y", "x + y"), ("x*y", "2*x*y"), ("1", "2"), ("x^2", "x^2 + y^2")]:
        f = StrictPP.from_values(Fq, {3: src})
        assert pushforward_strict(f, m, Q).values[2] == P(expected)


def test_brion_pushforward_to_point():
    B2, B3, pt = point_stack(2), point_stack(3), point_stack(1)
    m = StackMorphism(B2, pt, (0,), ((),), (0, 0))
    assert pushforward_strict(StrictPP.const(B2, 1), m).values[0] == Poly.const(Fraction(1, 2))
    m3 = StackMorphism(B3, pt, (0,), ((),), (0, 0, 0))
    assert pushforward_strict(StrictPP.const(B3, 6), m3).values[0] == Poly.const(2)


def test_pushforward_rejects_collapsing_map():
    F1, F2 = faces_stack(["x", "y"]).stack, faces_stack(["t"]).stack
    # {x,y} -> {t} sending both rays to t collapses the plane
    m = StackMorphism(F1, F2, (0, 1, 1, 1), ((), ((1,),), ((1,),), ((1,), (1,))), None)
    with pytest.raises(NotRelDimZero):
        pushforward_strict(StrictPP.const(F1, 1), m)


def test_barycentric_coarsening_values():
    F = faces_stack(2)
    mn = min_fn(F, 3, ["x", "y"])
    to_base = mn.sub.to_base
    push = lambda g: pushforward_strict(g, to_base, F).values[3]
    one = StrictPP.const(mn.sub.current, 1)
    assert push(one) == P("1")
    assert push(mn.value).is_zero()
    assert push((mn * mn).value) == P("-x*y")
    assert push((mn * mn * mn).value) == P("-x*y^2 - x^2*y")


def test_pushforward_of_pullback_is_identity_on_subdivision():
    F = faces_stack(3)
    sub = Subdivision(F).stellar(top(F), (1, 1, 1)).stellar(4, (1, 1))
    for s in ["x*y*z", "x^2 + y*z", "3*x - z", "1"]:
        f = StrictPP.from_values(F, {top(F): s})
        g = pullback(f, sub.to_base, sub.current)
        assert g.is_compatible()
        assert pushforward_strict(g, sub.to_base, F) == f


def test_min_fn_on_three_coordinates():
    F = faces_stack(3)
    mn = min_fn(F, top(F), [0, 1, 2])
    assert len(mn.sub.history) == 1
    assert mn.value.is_compatible()
    assert pushforward_strict(mn.value, mn.sub.to_base, F).is_zero()


def test_subdivision_json_and_replay():
    F = faces_stack(3)
    sub = Subdivision(F).stellar(top(F), (1, 1, 1))
    again = Subdivision.from_json(F, sub.to_json())
    assert again == sub
    assert sub.replay(sub.history) == sub
    with pytest.raises(HistoryMismatch):
        Subdivision(F).stellar(top(F), (2, 1, 1))


def test_common_refinement_of_two_stellar_histories():
    F = faces_stack(3)
    a = Subdivision(F).stellar(4, (1, 1))
    b = Subdivision(F).stellar(top(F), (1, 1, 1))
    r = common_refinement(a, b)
    a.morphism_from(r)
    b.morphism_from(r)
    fa = min_fn(F, 4, [0, 1])
    fb = min_fn(F, top(F), [0, 1, 2])
    s = fa + fb
    assert s.sub.history == r.history
    assert restrict(fa, r).value.is_compatible()


def test_descend_and_simplify():
    F = faces_stack(2)
    sub = Subdivision(F).stellar(3, (1, 1))
    f = StrictPP.from_values(F, {3: "x*y + x"})
    g = PPClass(sub, pullback(f, sub.to_base, sub.current))
    down = g.simplify()
    assert not down.sub.history and down.value == f
    assert descend(min_fn(F, 3, [0, 1]), Subdivision(F)) is None


def test_ppclass_equality_across_subdivisions():
    F = faces_stack(2)
    f = PPClass.strict(StrictPP.from_values(F, {3: "x"}))
    sub = Subdivision(F).stellar(3, (1, 1))
    assert restrict(f, sub) == f
    assert PPClass.from_json(F, restrict(f, sub).to_json()) == f


def test_pushforward_of_subdivided_class():
    F = faces_stack(2)
    mn = min_fn(F, 3, [0, 1])
    pushed = pushforward(mn, identity_morphism(F.stack), F)
    assert pushed == mn


def test_stack_mismatch():
    a = StrictPP.const(faces_stack(2), 1)
    b = StrictPP.const(faces_stack(2), 1)
    with pytest.raises(StackMismatch):
        a + b


def test_degree_basis_counts_stanley_reisner_monomials():
    F = faces_stack(2)
    assert len(degree_basis(F, 1)) == 2 and len(degree_basis(F, 2)) == 3
    assert len(degree_basis(F, 2, homological=True)) == 1
    M = moduli_cone_stack(0, 5)
    # rays: 10; degree 2: squares of rays plus products along the 15 edges of the Petersen graph
    assert len(degree_basis(M, 1)) == 10
    assert len(degree_basis(M, 2)) == 10 + 15


def test_triple_axis_homological_basis():
    F = faces_stack(["x", "y", "z"], boundary=[(), ("x",), ("y",), ("z",)])
    basis = degree_basis(F, 2, homological=True)
    assert sorted(str(b.values[top(F)]) for b in basis) == ["x*y", "x*z", "y*z"]
