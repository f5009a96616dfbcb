"""Genus zero: Keel ranks, WDVV ideal membership, log Chow ranks."""

import itertools
from math import comb

import pytest

from logchow.errors import TypeMismatch
from logchow.genus0 import (SRData, blowup_at_cone, boundary_divisor, boundary_subsets, cross_ratio_divisor,
                            in_wdvv_ideal, keel_rank, keel_ranks, log_chow_equal, log_chow_rank, ray_count,
                            sr_coordinates, wdvv_generators)
from logchow.logstrata import LogElem, evaluate_genus0
from logchow.piecewise import PPClass, StrictPP, pullback
from logchow.stablegraphs import moduli_cone_stack
from logchow.stratalgebra import psi_as_boundary


def test_small_keel_ranks():
    assert keel_rank(4, 1) == 1
    assert keel_ranks(4) == (1, 1)
    assert keel_ranks(5) == (1, 5, 1)
    assert keel_ranks(6) == (1, 16, 16, 1)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_poincare_symmetry(n):
    r = keel_ranks(n)
    assert r == tuple(reversed(r))


@pytest.mark.parametrize("n", [4, 5, 6])
def test_picard_rank_formula(n):
    # rank of the Picard group of M̄_{0,n}: 2^(n-1) - C(n,2) - 1
    assert keel_rank(n, 1) == 2 ** (n - 1) - comb(n, 2) - 1


@pytest.mark.slow
def test_n7_ranks():
    assert keel_rank(7, 1) == 2 ** 6 - comb(7, 2) - 1 == 42
    assert keel_rank(7, 2) == 127


def test_ray_counts():
    for n in range(4, 7):
        assert ray_count(n) == 2 ** (n - 1) - n - 1 == len(boundary_subsets(n))


def test_wdvv_generators_lie_in_ideal():
    for n in (4, 5):
        for w in wdvv_generators(n):
            assert w.value.is_compatible()
            assert in_wdvv_ideal(w.value, n)
    assert not in_wdvv_ideal(boundary_divisor(5, {1, 2}), 5)
    assert not in_wdvv_ideal(StrictPP.const(moduli_cone_stack(0, 5), 1), 5)


def test_cross_ratio_divisor_is_symmetric():
    assert cross_ratio_divisor(5, 1, 2, 3, 4) == cross_ratio_divisor(5, 3, 4, 1, 2)
    assert cross_ratio_divisor(5, 1, 2, 3, 4) == cross_ratio_divisor(5, 2, 1, 4, 3)


def test_log_chow_equalities():
    assert log_chow_equal(boundary_divisor(4, {1, 2}), boundary_divisor(4, {1, 3}))
    assert not log_chow_equal(boundary_divisor(5, {1, 2}), boundary_divisor(5, {1, 3}))
    # all points of M̄_{0,5} are equivalent
    pts = [boundary_divisor(5, A) * boundary_divisor(5, B) for A, B in [({1, 2}, {3, 4}), ({1, 3}, {2, 5})]]
    assert log_chow_equal(pts[0], pts[1])
    assert log_chow_equal(boundary_divisor(5, {1, 2}) ** 2, -pts[0])


def test_psi_expressions_agree():
    for n in (4, 5):
        reps = [evaluate_genus0(LogElem.from_strata(psi_as_boundary(n, 1, j, k)))
                for j, k in itertools.combinations(range(2, n + 1), 2)]
        for r in reps[1:]:
            assert log_chow_equal(reps[0], r, n)


def test_blowup_ranks():
    sub = blowup_at_cone(5)
    assert log_chow_rank(5, 0, sub) == 1
    assert log_chow_rank(5, 1, sub) == 6
    assert log_chow_rank(5, 2, sub) == 1
    assert log_chow_rank(5, 1) == 5


def test_blowup_of_threefold_along_a_curve():
    # a 2-cone of Σ_{0,6} is a curve in the threefold M̄_{0,6}; blowing it up
    # adds one class in degree 1 and one in degree 2
    sub = blowup_at_cone(6, 2)
    assert [log_chow_rank(6, d, sub) for d in range(4)] == [1, 17, 17, 1]


def test_wdvv_pullbacks_stay_linear_in_rays():
    sub = blowup_at_cone(5)
    sr = SRData(sub.current)
    for w in wdvv_generators(5):
        g = pullback(w.value, sub.to_base, sub.current)
        coords = sr.expand(g)
        assert coords and all(sum(e for _, e in m) == 1 for m in coords)
        assert sr.to_function(coords) == g


def test_classes_on_subdivisions_compare_with_base_classes():
    sub = blowup_at_cone(5)
    D = boundary_divisor(5, {1, 2})
    pulled = PPClass(sub, pullback(D, sub.to_base, sub.current))
    assert log_chow_equal(pulled, D, 5)
    assert log_chow_equal(pulled, PPClass.strict(boundary_divisor(5, {3, 4, 5})), 5)


def test_sr_coordinates_and_type_checks():
    c = sr_coordinates(boundary_divisor(5, {1, 2}) * boundary_divisor(5, {3, 4}), 5)
    assert len(c) == 1 and list(c.values()) == [1]
    with pytest.raises(TypeMismatch):
        in_wdvv_ideal(boundary_divisor(4, {1, 2}), 5)
    with pytest.raises(ValueError):
        keel_rank(5, 3)
