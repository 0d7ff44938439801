from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdimshift.group import Box, Z, Z2, boundary, invariance_ratio, is_invariant
from mdimshift.tiling import (PreconditionError, TowerConfig, TowerError, build_tower, folner_set,
                              prop_big_proportion_check, prop_big_proportion_constants, prop_many_tiles_constants,
                              syndeticity_witness, tile_of, tower_from_json, tower_to_json,
                              verify_partition_window, verify_prime_congruence)

TOWER = build_tower(TowerConfig("Z", 4, 1, 12))
TOWER2 = build_tower(TowerConfig("Z2", 4, 1, 8))


def test_first_levels_follow_the_recurrence():
    assert TOWER.shape(1) == Box((0,), (4,))
    assert TOWER.shape(2) == Box((-4,), (12,))
    assert TOWER.shape(3) == Box((-20,), (44,)) and TOWER.shape(3).size == 64


def test_tile_lookup():
    assert tile_of(TOWER, 1, (5,)) == (0, (4,))
    assert tile_of(TOWER, 1, (0,)) == (0, (0,))
    assert tile_of(TOWER, 2, (-4,)) == (0, (0,))


def test_level2_window_fragments():
    rep = verify_partition_window(TOWER.level(2), Box((0,), (16,)))
    assert rep.ok and rep.whole_tiles == 0
    assert sorted((p[0][0], p[-1][0]) for _, p in rep.partial_fragments) == [(0, 11), (12, 15)]
    rep1 = verify_partition_window(TOWER.level(1), Box((0,), (16,)))
    assert rep1.whole_tiles == 4 and not rep1.partial_fragments


def test_level2_is_union_of_level1_tiles():
    tiles = sorted(c for c, _, _ in verify_partition_window(TOWER.level(1), TOWER.shape(2)).fragments)
    assert tiles == [(-4,), (0,), (4,), (8,)]


@pytest.mark.parametrize("n", range(1, 8))
def test_shapes_nest_and_contain_identity(n):
    assert TOWER.shape(n + 1).contains_box(TOWER.shape(n))
    assert TOWER2.shape(min(n + 1, 8)).contains_box(TOWER2.shape(min(n, 7)))
    assert (0,) in TOWER.shape(n)


@pytest.mark.parametrize("n", range(1, 6))
def test_prime_congruence_on_samples(n):
    assert verify_prime_congruence(TOWER, n, samples=20, seed=n).ok
    assert verify_prime_congruence(TOWER2, n, samples=10, seed=n).ok


def test_corrupted_base_breaks_congruence():
    bad = build_tower(TowerConfig("Z", 4, 1, 6, ((2, TOWER.base(2) + 1),)))
    rep = verify_prime_congruence(bad, 1, samples=5)
    assert not rep.ok and rep.witness["reason"] == "not a refinement"


def test_growth_two_rejected():
    with pytest.raises(TowerError):
        build_tower(TowerConfig("Z", 2))


def test_level_past_n_max_reports_required_level():
    with pytest.raises(TowerError, match="need level >= 13"):
        TOWER.side(13)


def test_folner_certificates_shrink():
    etas = [TOWER.certificate(n).eta for n in range(1, 10)]
    assert all(e > 0 for e in etas)
    assert TOWER.certificate(9).ratio < TOWER.certificate(3).ratio


def test_syndetic_with_one_period():
    F, miss = syndeticity_witness(TOWER2.level(2), Box((-30, -30), (31, 31)))
    assert miss is None and F.size == 16**2


def test_big_proportion_constants():
    K, delta = prop_big_proportion_constants(TOWER.level(1), Fraction(1, 2))
    assert K == Box((0,), (4,)) and delta == Fraction(1, 8)
    K, delta = prop_big_proportion_constants(TOWER.level(2), Fraction(1, 10))
    assert K == Box((-4,), (12,)) and delta == Fraction(1, 160)


def test_big_proportion_examples():
    lv = TOWER.level(1)
    assert prop_big_proportion_check(lv, Fraction(1, 2), Box((0,), (100,))) == (1, True)
    assert prop_big_proportion_check(lv, Fraction(1, 2), Box((1,), (101,))) == (Fraction(96, 100), True)
    with pytest.raises(PreconditionError):
        prop_big_proportion_check(lv, Fraction(1, 2), Box((0,), (4,)))


def test_many_tiles_constants_follow_the_proof():
    c = prop_many_tiles_constants(TOWER.level(1), 1)
    # R = [0, 4); R + T - T - R = [-6, 7)
    assert c.K_prime == Box((-6,), (7,))
    assert TOWER.level(1).tiles_inside(Box((0,), (1000,))) == 250


def test_folner_sets():
    assert folner_set(Z, 1) == Box((-1,), (2,))
    assert folner_set(Z2, 2).size == 25
    T = Box((0,), (2,))
    assert invariance_ratio(folner_set(Z, 10), T) == Fraction(2, 21)
    assert invariance_ratio(folner_set(Z, 20), T) == Fraction(2, 41)


def test_tower_json_round_trip():
    doc = tower_to_json(TOWER, 6)
    back = tower_from_json(doc)
    assert [back.base(n) for n in range(1, 7)] == [TOWER.base(n) for n in range(1, 7)]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(-10**40, 10**40), st.integers(-10**40, 10**40))
def test_center_lookup_is_consistent(n, x, y):
    lv = TOWER2.level(n)
    c = lv.center_of((x, y))
    assert (x, y) in lv.tile(c) and lv.is_center(c)
