from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdimshift.group import (Box, BoxDifference, GroupError, PointSet, Z, Z2, as_explicit, boundary, get_group,
                             invariance_ratio, is_invariant, product_set, same_set)


def test_z_enumeration_starts_0_1_minus1():
    assert [Z.enumerate(i) for i in range(1, 6)] == [(0,), (1,), (-1,), (2,), (-2,)]


def test_z2_enumeration_covers_shells_in_order():
    pts = [Z2.enumerate(i) for i in range(1, 26)]
    assert pts[0] == (0, 0)
    assert set(pts[1:9]) == {(x, y) for x in (-1, 0, 1) for y in (-1, 0, 1)} - {(0, 0)}
    assert set(pts[9:25]) == {(x, y) for x in range(-2, 3) for y in range(-2, 3) if max(abs(x), abs(y)) == 2}


@given(st.integers(1, 5000))
def test_rank_inverts_enumerate(i):
    assert Z.rank(Z.enumerate(i)) == i
    assert Z2.rank(Z2.enumerate(i)) == i


def test_bad_group_id():
    with pytest.raises(GroupError):
        get_group("Q")


def test_boundary_of_interval_by_hand():
    # T + g straddles [0, 10) with T = [0, 3): g in {-2, -1} and {8, 9}
    B = boundary(Box((0,), (10,)), Box((0,), (3,)))
    assert sorted(B) == [(-2,), (-1,), (8,), (9,)]
    assert invariance_ratio(Box((0,), (10,)), Box((0,), (3,))) == Fraction(4, 10)


boxes1 = st.tuples(st.integers(-6, 6), st.integers(1, 7)).map(lambda t: Box((t[0],), (t[0] + t[1],)))
boxes2 = st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 4), st.integers(1, 4)).map(
    lambda t: Box((t[0], t[1]), (t[0] + t[2], t[1] + t[3])))


@settings(max_examples=60)
@given(st.one_of(st.tuples(boxes1, boxes1), st.tuples(boxes2, boxes2)))
def test_closed_form_boundary_matches_scan(pair):
    F, T = pair
    assert same_set(boundary(F, T), boundary(as_explicit(F), as_explicit(T)))


@settings(max_examples=60)
@given(st.one_of(st.tuples(boxes1, boxes1), st.tuples(boxes2, boxes2)))
def test_box_product_matches_pointwise(pair):
    A, B = pair
    assert same_set(product_set(A, B), product_set(as_explicit(A), as_explicit(B)))


def test_invariance_is_strict():
    F, T = Box((0,), (10,)), Box((0,), (3,))
    assert not is_invariant(F, T, Fraction(4, 10))
    assert is_invariant(F, T, Fraction(41, 100))


def test_box_difference_size():
    D = BoxDifference(Box((0, 0), (4, 4)), Box((1, 1), (3, 3)))
    assert D.size == 12 == len(list(D))


def test_huge_box_size_is_exact():
    L = 4**3000
    assert Box((-L,), (L,)).size == 2 * L
    assert PointSet.of([(1,), (2,)]).size == 2
