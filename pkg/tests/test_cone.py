from fractions import Fraction as Fr

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdimshift.cone import (APEX, STAR, ConeError, ConePoint, covering_radius, linf_distance, net,
                            net_power_index, net_power_rank, net_power_size, net_power_slot, restricted_net,
                            rho_F_truncated, rho_truncated, symbol_distance, weights_for)
from mdimshift.group import Box, Z


def P(b, t):
    return ConePoint(b, Fr(t))


def test_cone_distances():
    assert symbol_distance((P(0, "3/10"),), (P(0, "4/10"),)) == Fr(1, 10)
    assert symbol_distance((P(0, "3/10"),), (P(1, "4/10"),)) == Fr(7, 10)
    assert symbol_distance((APEX,), (P(2, 1),)) == 1
    assert linf_distance((P(0, 1), P(1, 1)), (P(1, 1), P(1, 0))) == 2


def test_apex_is_shared():
    assert P(2, 0) == APEX == P(1, 0)


def test_star_has_no_distance():
    with pytest.raises(ConeError):
        symbol_distance(STAR, (APEX,))


def test_net_sizes_and_density():
    assert net(1).size == 7 and net(1).spacing == Fr(1, 2)
    assert net(2).size == 13
    assert covering_radius(net(1)) == Fr(1, 4) <= Fr(1, 2)
    assert covering_radius(net(3)) <= Fr(1, 8)
    assert not restricted_net(1).conforming


def test_mixed_radix_examples():
    assert net_power_index(1, 3, 0) == ((APEX,),) * 3
    assert net_power_index(1, 1, 6) == ((P(2, 1),),)
    pts = net(1).points
    assert net_power_index(1, 2, 7) == ((pts[1],), (pts[0],))


@given(st.integers(1, 3), st.integers(1, 4), st.integers(1, 2), st.data())
def test_index_rank_slot_agree(n, m, d, data):
    i = data.draw(st.integers(0, net_power_size(n, m, d) - 1))
    tup = net_power_index(n, m, i, d)
    assert net_power_rank(n, tup, d) == i
    assert all(net_power_slot(n, m, i, s, d) == tup[s] for s in range(m))


def test_weights_have_closed_form_tails():
    W = weights_for(Z)
    assert W.total() == 2
    assert W.tail(5) == Fr(1, 3**5)
    W2 = weights_for("Z2")
    assert W2.total() == Fr(9, 4)


def test_rho_bounds():
    W = weights_for(Z)
    x = lambda g: (APEX,)
    y = lambda g: (P(0, 1),) if g == (0,) else (APEX,)
    assert rho_truncated(x, x, 5, W) == (0, 2 * W.tail(5))
    lo, up = rho_truncated(x, y, 5, W)
    assert lo == 1 and up == 1 + 2 * W.tail(5)
    far = lambda g: (P(1, 1),)
    near = lambda g: (P(0, 1),)
    assert rho_truncated(far, near, 0, W) == (2, 2 + 2 * W.tail(0))


def test_rho_F_finds_the_shifted_site():
    W = weights_for(Z)
    x = lambda g: (APEX,)
    y = lambda g: (P(0, 1),) if g == (3,) else (APEX,)
    lo, _ = rho_F_truncated(x, y, Box((0,), (5,)), 2, W)
    assert lo == 1
