import random
from fractions import Fraction

import pytest

from mdimshift.analysis import (FMap, UnresolvedError, almost_periodicity_check, f_agree_off_J, invariant_window,
                                lemma36_check, mdim_upper_estimate, nonembed_certificate, ratio_report)
from mdimshift.cone import STAR, apex_tuple
from mdimshift.construction import Construction
from mdimshift.fixtures import corrupt, tamper_steps
from mdimshift.group import Box
from mdimshift.tiling import PreconditionError


def test_ratio_row_k1(con_z):
    row = ratio_report(con_z).rows[0]
    assert (row.J, row.T, row.ratio) == (4, 4, 1)
    assert (row.lower, row.upper) == (Fraction(3, 4), 1)


def test_ratio_report_windows_and_deviation(con_z, con_z2):
    for con in (con_z, con_z2):
        rep = ratio_report(con)
        assert rep.ok
        last = rep.rows[-1]
        assert last.deviation <= last.delta / 2 + Fraction(1, last.T)


def test_ratio_csv_has_one_row_per_step(con_z):
    lines = ratio_report(con_z).to_csv().splitlines()
    assert lines[0].startswith("k,") and len(lines) == 1 + con_z.depth


def test_certificate_passes_and_tight_case_is_B_k_2(con_z, con_z2):
    for con in (con_z, con_z2):
        cert = nonembed_certificate(con)
        assert cert.ok
        for e in cert.entries:
            if e.N == e.k - 1:
                st = con.step(e.k)
                side = con.shape(e.k).sides[0] + 2 * (e.k - 1)
                assert e.FN_S == side**con.D
                assert e.FN_S * st.delta.denominator < (st.delta.denominator + st.delta.numerator) * st.shape_size


def test_certificate_fails_on_increasing_delta(con_z):
    bad = Construction(con_z.cfg, tamper_steps("delta-increasing", con_z.steps), con_z.tower)
    fails = nonembed_certificate(bad).failures()
    assert fails and fails[0].tag == "Part4(N=1,k=2)"


def test_almost_periodicity(con_z):
    rep = almost_periodicity_check(con_z, 1, samples=100)
    assert rep.ok and len(rep.centers) == 100 and 0 in rep.centers
    assert max(abs(j) for j in rep.centers) == 10 * con_z.step(2).shape_size


def test_almost_periodicity_catches_corruption(con_z):
    rep = almost_periodicity_check(corrupt("corrupt-z", con_z), 1, samples=10)
    assert not rep.ok and rep.mismatch["g"] == (1,)


def test_almost_periodicity_needs_depth(con_z2):
    with pytest.raises(UnresolvedError):
        almost_periodicity_check(con_z2, 2)


@pytest.mark.parametrize("k", [1, 2])
def test_upper_estimate_on_tile_unions(con_z, k):
    st = con_z.step(k)
    E = invariant_window(con_z, k, Fraction(1, 10))
    est = mdim_upper_estimate(con_z, k, E, Fraction(1, 10))
    # E is a union of level-n_k tiles: the estimate is exactly the star density
    assert est.tiles * st.shape_size == E.size
    assert est.estimate == Fraction(st.m, st.shape_size) and est.ok


def test_upper_estimate_off_grid(con_z):
    E = invariant_window(con_z, 2, Fraction(1, 10), shift=(7,))
    est = mdim_upper_estimate(con_z, 2, E, Fraction(1, 10))
    assert est.ok and est.tiles * con_z.step(2).shape_size < E.size


def test_upper_estimate_precondition(con_z):
    with pytest.raises(PreconditionError):
        mdim_upper_estimate(con_z, 1, Box((0,), (12,)), Fraction(1, 10))
    # eps = 1: the precondition is easy and the bound trivially holds
    est = mdim_upper_estimate(con_z, 1, Box((0,), (40,)), 1)
    assert est.ok


def test_f_is_u_on_J_and_p_on_later_J(con_z):
    m = con_z.count_stars(1)
    u = [3] * m
    f = FMap(con_z, 1, u)
    net = con_z.cfg.net_at(1)
    for g in con_z.T_box(1):
        assert f(g) == (net.points[3],)
    # a star of x_{2,1} outside T_1, translated back by h_1
    Hk = con_z.H(1)
    g = tuple(x - h for x, h in zip(con_z.star_position(2, con_z.count_stars(2) - 1), Hk))
    assert not con_z.in_T(1, g) and con_z.in_J(2, g)
    assert f(g) == apex_tuple(1)


def test_f_agrees_off_J(con_z):
    assert f_agree_off_J(con_z, 1, samples=300) == []
    assert f_agree_off_J(con_z, 2, samples=100) == []


def test_f_local_membership(con_z):
    """On level-n_1 tiles inside T_2, f_2(u) agrees with x_{1,1} off its stars."""
    rng = random.Random(4)
    m = con_z.count_stars(2)
    f = FMap(con_z, 2, [rng.randrange(13) for _ in range(m)])
    T = con_z.T_box(2)
    H = con_z.H(1)
    L1 = con_z.tower.side(con_z.step(1).n)
    S1 = con_z.shape(1)
    for _ in range(100):
        c = L1 * rng.randrange((T.lo[0] + H[0]) // L1 + 1, (T.hi[0] + H[0]) // L1 - 1)
        for loc in S1:
            base = con_z.x_value(1, loc)
            if base is not STAR:
                assert f((loc[0] + c - H[0],)) == base


def test_lemma_pairs_k1(con_z, con_z2):
    for con in (con_z, con_z2):
        rep = lemma36_check(con, 1, pairs=30)
        assert rep.ok and rep.full_T and rep.tightest >= 0


def test_lemma_one_site_pair_reaches_diameter(con_z):
    rep = lemma36_check(con_z, 1, pairs=2)
    assert rep.ok  # pair 0 equal, pair 1 differs at one site by distance 2


def test_lemma_refuses_unsampleable_assignments(con_z2):
    with pytest.raises(UnresolvedError):
        lemma36_check(con_z2, 2)
