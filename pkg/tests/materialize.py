"""Array-based reference for x_{2,1} on Z, built straight from the written rules.

It reads only the step records, the tower arithmetic and the net, and shares
no code with the lazy oracles: tiles are found by scanning, tuples by repeated
divmod, kept stars by a running counter in ascending position order.
"""

from mdimshift.cone import APEX, STAR, ConePoint
from mdimshift.group import Z


def x1_array(con):
    s1 = con.steps[0]
    a, L = con.tower.base(s1.n), con.tower.side(s1.n)
    pos = sorted(range(a, a + L), key=lambda x: Z.rank((x,)))
    val, order = {}, {}
    for phi, x in enumerate(pos):
        if phi < s1.m:
            val[x], order[x] = STAR, phi
        else:
            val[x] = (ConePoint(phi % 3, 1),) * con.d
    return val, order


def tuple_digits(j, radix, width):
    out = []
    for _ in range(width):
        j, r = divmod(j, radix)
        out.append(r)
    return out[::-1]


def x2_array(con):
    """dict g -> symbol over S_{n_2} (Z only)."""
    s1, s2 = con.steps[0], con.steps[1]
    tw, d = con.tower, con.d
    x1, order = x1_array(con)
    a1, L1 = tw.base(s1.n), tw.side(s1.n)
    al, Ll = tw.base(s2.l_prev), tw.side(s2.l_prev)
    a2, L2 = tw.base(s2.n), tw.side(s2.n)
    net = con.cfg.net_at(1)
    R = net.size ** (d * s1.m)

    def tile(g):
        # centers are multiples of L1; the tile of center c is [c + a1, c + a1 + L1)
        c = ((g - a1) // L1) * L1
        return c, g - c

    w = {}
    for g in range(al, al + Ll):
        c, loc = tile(g)
        v = x1[loc]
        j = c // L1
        if 0 <= j < R and v is STAR:
            digs = tuple_digits(j, net.size, d * s1.m)
            r = order[loc]
            w[g] = tuple(net.points[digs[r * d + i]] for i in range(d))
        else:
            w[g] = v
    w_stars = sum(1 for v in w.values() if v is STAR)
    budget = s2.m - w_stars
    x2, kept = {}, 0
    for g in range(a2, a2 + L2):
        if al <= g < al + Ll:
            x2[g] = w[g]
            continue
        _, loc = tile(g)
        v = x1[loc]
        if v is STAR:
            if kept < budget:
                kept += 1
            else:
                v = (APEX,) * d
        x2[g] = v
    return x2, w
