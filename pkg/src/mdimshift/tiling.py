"""Lattice box tilings of Z and Z^2 and primely congruent towers of them.

Level n of a tower has one shape S_n = [a_n, a_n + L_n)^D with L_n = b^n and
centers L_n Z^D. The bases follow a_1 = 0, a_n = a_{n-1} - anchor * L_{n-1},
which keeps 0 in every shape, pushes both ends of S_n to infinity, and makes
every level-n tile a union of level-(n-1) tiles.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from ._bigint import dec, ratio, undec
from .group import Box, FiniteSubset, GroupError, LatticeGroup, boundary, get_group, invariance_ratio, is_invariant


class TowerError(ValueError):
    pass


@dataclass(frozen=True)
class Tiling:
    """A finite tiling by translates of `shapes`; shape i has centers offsets[i] + steps[i] * Z^D.

    Only single-shape lattice tilings are built, but queries that make sense
    for several shapes accept them.
    """

    shapes: tuple
    steps: tuple
    offsets: tuple

    @property
    def dim(self) -> int:
        return self.shapes[0].dim

    @property
    def shape(self) -> Box:
        return self.shapes[0]

    @property
    def step(self) -> tuple:
        return self.steps[0]

    def _single(self):
        if len(self.shapes) != 1:
            raise NotImplementedError("only single-shape tilings support tile lookup")
        return self.shapes[0], self.steps[0], self.offsets[0]

    def center_of(self, g, shift=None) -> tuple:
        """Center c of the tile S + c + shift containing g."""
        S, step, off = self._single()
        shift = shift or (0,) * len(g)
        return tuple(
            o + s * ((x - lo - o - sh) // s) for x, lo, s, o, sh in zip(g, S.lo, step, off, shift)
        )

    def tile(self, c, shift=None) -> Box:
        shift = shift or (0,) * self.dim
        return self.shape.translate(tuple(a + b for a, b in zip(c, shift)))

    def is_center(self, c) -> bool:
        _, step, off = self._single()
        return all((x - o) % s == 0 for x, o, s in zip(c, off, step))

    def tiles_inside(self, F: Box, shift=None) -> int:
        """Number of tiles of (this tiling + shift) contained in the box F."""
        S, step, off = self._single()
        shift = shift or (0,) * self.dim
        total = 1
        for lo, side, s, o, sh, e0, e1 in zip(S.lo, S.sides, step, off, shift, F.lo, F.hi):
            base = lo + o + sh
            first = -((base - e0) // s)  # ceil((e0 - base) / s)
            last = (e1 - side - base) // s
            total *= max(0, last - first + 1)
        return total

    def covered_inside(self, F: Box, shift=None) -> int:
        return self.tiles_inside(F, shift) * self.shape.size


@dataclass(frozen=True)
class TowerConfig:
    group: str = "Z"
    growth: int = 4
    anchor: int = 1
    n_max: int = 12
    base_overrides: tuple = ()  # ((n, a_n), ...) -- only for corrupted fixtures

    def validate(self) -> LatticeGroup:
        grp = get_group(self.group)
        if self.growth < 3:
            raise TowerError("growth factor must be >= 3 (growth 2 cannot grow both ends of the shapes)")
        if not 1 <= self.anchor <= self.growth - 2:
            raise TowerError(f"anchor must lie in [1, growth-2], got {self.anchor}")
        if self.n_max < 1:
            raise TowerError("n_max must be >= 1")
        return grp


@dataclass(frozen=True)
class LevelCertificate:
    n: int
    folner_set: Box
    ratio: Fraction
    eta: Fraction


@dataclass(frozen=True)
class TilingTower:
    cfg: TowerConfig
    group: LatticeGroup = field(compare=False)

    @property
    def dim(self) -> int:
        return self.group.dim

    @property
    def n_max(self) -> int:
        return self.cfg.n_max

    def _check(self, n):
        if not 1 <= n <= self.cfg.n_max:
            raise TowerError(f"tower exhausted; need level >= {n}" if n > self.cfg.n_max else f"bad level {n}")

    def side(self, n: int) -> int:
        self._check(n)
        return _power(self.cfg.growth, n)

    def base(self, n: int) -> int:
        self._check(n)
        for m, a in self.cfg.base_overrides:
            if m == n:
                return a
        b, A = self.cfg.growth, self.cfg.anchor
        return -A * (_power(b, n) - b) // (b - 1)

    def right_end(self, n: int) -> int:
        return self.base(n) + self.side(n)

    def shape(self, n: int) -> Box:
        a, L = self.base(n), self.side(n)
        return Box((a,) * self.dim, (a + L,) * self.dim)

    def level(self, n: int) -> Tiling:
        L = self.side(n)
        return Tiling((self.shape(n),), ((L,) * self.dim,), ((0,) * self.dim,))

    def certificate(self, n: int) -> LevelCertificate:
        """Post-hoc Folner certificate: S_n is (A_n, eta_n)-invariant with A_n = [-n, n]^D."""
        A = self.group.ball(n)
        r = invariance_ratio(self.shape(n), A)
        eta = Fraction(1)
        while eta / 2 > r:
            eta /= 2
        return LevelCertificate(n, A, r, eta)


@lru_cache(maxsize=4096)
def _power(b, n):
    return b**n


def build_tower(cfg: TowerConfig) -> TilingTower:
    grp = cfg.validate()
    return TilingTower(cfg, grp)


def tile_of(tower: TilingTower, n: int, g, shift=None):
    """(shape index, center) of the tile of T_n + shift that contains g."""
    return 0, tower.level(n).center_of(g, shift)


def folner_set(group: LatticeGroup | str, n: int) -> Box:
    """F_n = [-n, n]^D."""
    if isinstance(group, str):
        group = get_group(group)
    return group.ball(n)


def folner_sequence(group: LatticeGroup | str, style: str = "cube"):
    if style != "cube":
        raise GroupError(f"unknown Folner style {style!r}")
    n = 1
    while True:
        yield folner_set(group, n)
        n += 1


# -- window checks ----------------------------------------------------------


@dataclass
class PartitionReport:
    ok: bool
    fragments: list  # (center, sorted points of the tile inside W, whole tile?)
    uncovered: list
    doubly_covered: list

    @property
    def whole_tiles(self) -> int:
        return sum(1 for _, _, whole in self.fragments if whole)

    @property
    def partial_fragments(self) -> list:
        return [(c, pts) for c, pts, whole in self.fragments if not whole]


def verify_partition_window(tiling: Tiling, W: FiniteSubset) -> PartitionReport:
    """Check every g in W lies in exactly one tile and return the fragments T|_W.

    Candidate tiles for g are the lattice centers adjacent to the floor-division
    guess, so a tiling whose shapes overlap or leave gaps is caught.
    """
    S, step, off = tiling._single()
    by_center: dict = {}
    uncovered, doubled = [], []
    for g in W:
        guess = tiling.center_of(g)
        hits = []
        for delta in _neighbors(tiling.dim):
            c = tuple(x + d * s for x, d, s in zip(guess, delta, step))
            if g in S.translate(c):
                hits.append(c)
        if not hits:
            uncovered.append(g)
        elif len(hits) > 1:
            doubled.append((g, tuple(hits)))
        else:
            by_center.setdefault(hits[0], []).append(g)
    frags = [(c, tuple(sorted(pts)), len(pts) == S.size) for c, pts in by_center.items()]
    return PartitionReport(not uncovered and not doubled, frags, uncovered, doubled)


def _neighbors(dim):
    return list(itertools.product((-1, 0, 1), repeat=dim))


@dataclass
class CongruenceReport:
    ok: bool
    checked: int
    witness: dict | None = None


def fragments_in_tile(tower: TilingTower, n: int, c) -> list:
    """T_n restricted to the level-(n+1) tile S_{n+1} + c, as per-axis interval lists.

    Each axis gives the cut points of level-n tiles inside the tile's interval;
    the fragments are products of consecutive pieces.
    """
    big = tower.shape(n + 1).translate(c)
    an, Ln = tower.base(n), tower.side(n)
    pieces = []
    for lo, hi in zip(big.lo, big.hi):
        first_cut = an + Ln * -(-(lo - an) // Ln)  # smallest level-n boundary >= lo
        cuts = [lo] + list(range(first_cut if first_cut > lo else first_cut + Ln, hi, Ln)) + [hi]
        pieces.append([(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1) if cuts[i] < cuts[i + 1]])
    return pieces


def verify_prime_congruence(tower: TilingTower, n: int, samples: int = 20, seed: int = 0, radius=None) -> CongruenceReport:
    """Sample pairs of level-(n+1) tiles and compare their level-n partitions.

    Checks refinement (every fragment is a whole level-n tile) and that the two
    partitions are translates of each other by c2^{-1} c1.
    """
    if n + 1 > tower.n_max:
        raise TowerError(f"tower exhausted; need level >= {n + 1}")
    rng = random.Random(seed)
    L1, Ln = tower.side(n + 1), tower.side(n)
    radius = radius if radius is not None else 10**6
    checked = 0
    for _ in range(samples):
        c1 = tuple(L1 * rng.randint(-radius, radius) for _ in range(tower.dim))
        c2 = tuple(L1 * rng.randint(-radius, radius) for _ in range(tower.dim))
        p1, p2 = fragments_in_tile(tower, n, c1), fragments_in_tile(tower, n, c2)
        for axis, (a1, a2) in enumerate(zip(p1, p2)):
            bad = [f for f in a1 if f[1] - f[0] != Ln]
            if bad:
                return CongruenceReport(False, checked, {"reason": "not a refinement", "center": c1, "axis": axis, "fragment": bad[0]})
            shift = c1[axis] - c2[axis]
            if [(x + shift, y + shift) for x, y in a2] != a1:
                return CongruenceReport(False, checked, {"reason": "partitions differ", "c1": c1, "c2": c2, "axis": axis})
        checked += 1
    return CongruenceReport(True, checked)


def syndeticity_witness(tiling: Tiling, W: FiniteSubset):
    """Finite F = [0, step)^D with F + C(S) covering W; returns (F, first uncovered point or None)."""
    S, step, off = tiling._single()
    F = Box((0,) * tiling.dim, step)
    for g in W:
        r = tuple((x - o) % s for x, o, s in zip(g, off, step))
        if r not in F:
            return F, g
    return F, None


# -- tiling propositions ----------------------------------------------------


def prop_big_proportion_constants(tiling: Tiling, eps) -> tuple:
    """K = union of shapes and delta = eps / |K|."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    K = tiling.shapes[0]
    for S in tiling.shapes[1:]:
        if S != K:
            raise NotImplementedError("union of distinct shapes")
    return K, eps / K.size


class PreconditionError(ValueError):
    pass


def prop_big_proportion_check(tiling: Tiling, eps, F: Box, g=None) -> tuple:
    """Exact covered proportion of F by whole tiles of tiling + g; asserts it exceeds 1 - eps."""
    eps = Fraction(eps)
    K, delta = prop_big_proportion_constants(tiling, eps)
    if not is_invariant(F, K, delta):
        raise PreconditionError(f"F is not (K, {delta})-invariant")
    covered = tiling.covered_inside(F, g)
    r = ratio(covered, F.size)
    return r, r > 1 - eps


@dataclass(frozen=True)
class ManyTilesConstants:
    n: int
    R: Box
    K_prime: Box
    eps_prime: Fraction
    A: Box
    translates: tuple
    K: Box
    eps: Fraction


def prop_many_tiles_constants(tiling: Tiling, n: int, eps_prime=Fraction(1, 2), eps=Fraction(1, 2)) -> ManyTilesConstants:
    """(K, eps) such that every (K, eps)-invariant F holds >= n tiles of each shape.

    Follows the constructive proof: R with R + C(S) = G, K' = R + T - T - R,
    a (K', eps')-invariant cube A, n disjoint translates of A laid along axis 0.
    """
    S, step, off = tiling._single()
    if n < 1:
        raise ValueError("n must be >= 1")
    if not all(a <= 0 < b for a, b in zip(S.lo, S.hi)):
        raise ValueError("shape must contain the identity")
    D = tiling.dim
    R = Box((0,) * D, step)
    if S.size == 1 and R.size == 1:
        K = Box((0,) * D, (1,) * D)
        return ManyTilesConstants(n, R, K, Fraction(eps_prime), K, ((0,) * D,), K, Fraction(eps))
    # R + T - T - R for boxes: each difference of [x, y) boxes is [x - y + 1, y - x)
    span = [r1 - r0 - 1 + t1 - t0 - 1 for r0, r1, t0, t1 in zip(R.lo, R.hi, S.lo, S.hi)]
    K_prime = Box(tuple(-s for s in span), tuple(s + 1 for s in span))
    eps_prime = Fraction(eps_prime)
    r = 0
    while True:
        A = Box((-r,) * D, (r + 1,) * D)
        if is_invariant(A, K_prime, eps_prime):
            break
        r += 1
    side = 2 * r + 1
    translates = tuple((j * side,) + (0,) * (D - 1) for j in range(n))
    K = Box((-r,) * D, (-r + n * side,) + (r + 1,) * (D - 1))
    return ManyTilesConstants(n, R, K_prime, eps_prime, A, translates, K, Fraction(eps))


# -- serialization ----------------------------------------------------------


def tower_to_json(tower: TilingTower, levels: int | None = None) -> dict:
    levels = min(levels or tower.n_max, tower.n_max)
    return {
        "group": tower.cfg.group,
        "growth": tower.cfg.growth,
        "anchor": tower.cfg.anchor,
        "n_max": tower.n_max,
        "levels": [
            {"n": n, "base": dec(tower.base(n)), "side": dec(tower.side(n)), "center_step": dec(tower.side(n))}
            for n in range(1, levels + 1)
        ],
    }


def tower_from_json(doc: dict) -> TilingTower:
    cfg = TowerConfig(doc["group"], int(doc["growth"]), int(doc.get("anchor", 1)), int(doc["n_max"]))
    tower = build_tower(cfg)
    overrides = []
    for lv in doc["levels"]:
        n = int(lv["n"])
        if undec(lv["side"]) != tower.side(n) or undec(lv["center_step"]) != tower.side(n):
            raise TowerError(f"level {n}: side/step inconsistent with growth")
        if undec(lv["base"]) != tower.base(n):
            overrides.append((n, undec(lv["base"])))
    if overrides:
        tower = build_tower(TowerConfig(cfg.group, cfg.growth, cfg.anchor, cfg.n_max, tuple(overrides)))
    return tower


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
