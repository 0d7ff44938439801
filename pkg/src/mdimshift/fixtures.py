"""Deliberately broken inputs, used to show that each checker can fail.

Each fixture perturbs one thing and names the stage where it is applied:
  corrupt-tower     level-2 base shifted by one, so level 2 no longer refines level 1
  h-in-R            h_1 replaced by the last element of R_1
  delta-increasing  recorded delta_k replaced by 1 - 2^-k (increasing)
  corrupt-z         z changed at one site of a far level-n_2 tile
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

from .cone import ConePoint, STAR
from .construction import Construction, PatternOracle

FIXTURES = {
    "corrupt-tower": "tower",
    "h-in-R": "construct",
    "delta-increasing": "construct",
    "corrupt-z": "verify",
}


class FixtureError(ValueError):
    pass


def check_name(name):
    if name is not None and name not in FIXTURES:
        raise FixtureError(f"unknown fixture {name!r}; expected one of {sorted(FIXTURES)}")


def tower_overrides(name, tower) -> tuple:
    if name != "corrupt-tower":
        return ()
    return ((2, tower.base(2) + 1),)


def tamper_steps(name, steps) -> list:
    steps = list(steps)
    if name == "h-in-R" and len(steps) >= 2:
        st = steps[1]
        h = tuple((st.r_size - 1) * s for s in st.stride)
        steps[1] = replace(st, h_prev=h)
    elif name == "delta-increasing":
        steps = [replace(st, delta=1 - Fraction(1, 2**st.k)) for st in steps]
    return steps


class CorruptedZ(Construction):
    """z altered at one site; everything else untouched."""

    corrupt_site: tuple = ()

    def z(self, horizon=None):
        clean = super().z(horizon)

        def ev(g):
            v = clean.evaluator(g)
            if g == self.corrupt_site and v is not STAR:
                swap = ConePoint(1, Fraction(1, 2))
                other = swap if v[0] != swap else ConePoint(2, Fraction(1, 2))
                return (other,) + tuple(v[1:])
            return v

        return PatternOracle(clean.tag + "(corrupted)", None, ev)


def corrupt(name, con: Construction) -> Construction:
    """Apply a verify-stage fixture to a planned construction."""
    if name != "corrupt-z":
        return con
    bad = CorruptedZ(con.cfg, con.steps, con.tower)
    if con.depth >= 2:
        # the extreme center that almost_periodicity_check always samples, plus one site
        top = 10 * con.step(2).shape_size * con.tower.side(con.step(2).n)
        bad.corrupt_site = (top + 1,) + (0,) * (con.D - 1)
    return bad
