"""Polynomials and exact linear algebra, checked against sympy."""

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from logchow.errors import MissingVariable, NotDivisible, ParseError
from logchow.exactalg import (Poly, RatMatrix, SparseEchelon, elementary_divisors, exact_divide,
                              is_unimodular_system, normalize_linear_form, nullspace, rank, rref,
                              solve_square, sparse_rank)

VARS = ["x", "y", "z"]
SYM = sympy.symbols(VARS)


def to_sympy(p: Poly):
    out = sympy.Integer(0)
    for m, c in p.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for v, e in m:
            term *= SYM[VARS.index(v)] ** e
        out += term
    return sympy.expand(out)


polys = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
    st.fractions(min_value=-5, max_value=5, max_denominator=4),
    max_size=4,
).map(lambda d: sum((Poly.monomial({v: e for v, e in zip(VARS, k) if e}, c) for k, c in d.items()), Poly.zero()))


@settings(max_examples=100)
@given(polys, polys)
def test_ring_operations_match_sympy(a, b):
    assert to_sympy(a + b) == sympy.expand(to_sympy(a) + to_sympy(b))
    assert to_sympy(a * b) == sympy.expand(to_sympy(a) * to_sympy(b))
    assert to_sympy(a - b) == sympy.expand(to_sympy(a) - to_sympy(b))


@settings(max_examples=100)
@given(polys, polys)
def test_exact_divide_recovers_factor(a, b):
    if b.is_zero():
        return
    assert exact_divide(a * b, b) == a


def test_exact_divide_rejects_non_multiple():
    with pytest.raises(NotDivisible):
        exact_divide(Poly.parse("x^2 + y"), Poly.parse("x"))


def test_parse_and_print_round_trip():
    p = Poly.parse("2*x^2*y - 3/4*z + 1")
    assert Poly.parse(str(p)) == p
    assert p.degree() == 3
    assert p.coeff((("x", 2), ("y", 1))) == 2
    assert p.constant_term() == 1


def test_parse_errors():
    for bad in ["x +", "2**", "(x", "x $ y"]:
        with pytest.raises(ParseError):
            Poly.parse(bad)


def test_substitute_requires_every_variable():
    p = Poly.parse("x*y")
    assert p.substitute({"x": Poly.parse("y + 1"), "y": 2}) == Poly.parse("2*y + 2")
    with pytest.raises(MissingVariable):
        p.substitute({"x": 1})


def test_homogeneous_parts():
    p = Poly.parse("x^2 + x*y + y + 3")
    assert p.homogeneous_part(2) == Poly.parse("x^2 + x*y")
    assert not p.is_homogeneous()
    assert p.homogeneous_part(2).is_homogeneous(2)


def test_normalize_linear_form():
    scalar, key, prim = normalize_linear_form(Poly.parse("-2*x + 4*y"))
    assert scalar * prim == Poly.parse("-2*x + 4*y")
    assert key == (("x", 1), ("y", -2))


def random_matrix(rng, r, c, lo=-3, hi=3):
    return [[Fraction(rng.randint(lo, hi), rng.choice([1, 1, 2, 3])) for _ in range(c)] for _ in range(r)]


def test_rank_rref_nullspace_match_sympy():
    rng = random.Random(7)
    for _ in range(60):
        r, c = rng.randint(1, 6), rng.randint(1, 6)
        m = random_matrix(rng, r, c)
        if rng.random() < 0.4 and r > 1:
            m[-1] = [a + b for a, b in zip(m[0], m[1 % r])]
        sm = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in m])
        assert rank(m) == sm.rank()
        rows, pivots = rref(m)
        assert tuple(pivots) == tuple(sm.rref()[1])
        basis = nullspace(m, c)
        assert len(basis) == c - sm.rank()
        for v in basis:
            assert all(sum(row[j] * v[j] for j in range(c)) == 0 for row in m)


def test_sparse_echelon_matches_dense_rank():
    rng = random.Random(3)
    for _ in range(40):
        rows = []
        for _ in range(rng.randint(1, 8)):
            rows.append({k: Fraction(rng.randint(-3, 3)) for k in rng.sample(range(8), rng.randint(1, 4))})
        dense = [[r.get(k, 0) for k in range(8)] for r in rows]
        assert sparse_rank(rows) == rank(dense)
        ech = SparseEchelon()
        for r in rows:
            ech.add(r)
        combo = {}
        for r in rows[:2]:
            for k, v in r.items():
                combo[k] = combo.get(k, 0) + 2 * v
        assert ech.contains({k: v for k, v in combo.items() if v})


def test_smith_normal_form_matches_sympy():
    from sympy.matrices.normalforms import smith_normal_form
    rng = random.Random(11)
    for _ in range(30):
        m = [[rng.randint(-6, 6) for _ in range(3)] for _ in range(3)]
        snf = smith_normal_form(sympy.Matrix(m), domain=sympy.ZZ)
        expected = sorted(abs(snf[i, i]) for i in range(3) if snf[i, i] != 0)
        assert sorted(elementary_divisors(m)) == expected


def test_unimodular_and_inverse():
    assert is_unimodular_system([[1, 0], [1, 1]])
    assert not is_unimodular_system([[1, 1], [1, -1]])
    inv = solve_square([[2, 1], [1, 1]])
    assert inv == [[1, -1], [-1, 2]]
    with pytest.raises(ValueError):
        solve_square([[1, 2], [2, 4]])


def test_ratmatrix_transpose():
    m = RatMatrix([[1, 2, 3], [4, 5, 6]])
    assert m.transpose().transpose() == m
    assert rank(m) == 2
