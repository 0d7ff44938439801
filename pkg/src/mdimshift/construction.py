"""Steps 1..K of the inductive construction, evaluated lazily.

Nothing of size |S_{n_k}| is ever materialized. Each pattern is a recursive
oracle: to read x_{k,1} at g, find g's level-n_{k-1} tile inside S_{n_k},
classify the tile (an R-block of w_{k-1}, another tile of w_{k-1}, or a tile
outside the w-block) and recurse into x_{k-1,1}. Star ranks travel with the
recursion so that R-blocks can substitute the right mixed-radix digit and
outside tiles can decide whether an inherited star is kept.

Positions of a level-k shape are ordered hierarchically: level-n_{k-1} tiles
in row-major order (axis 0 major), then the order of x_{k-1,1} inside each
tile. At k = 1 the order is the group enumeration restricted to the shape.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

from . import _bigint
from .cone import STAR, Net, apex_tuple, ConePoint, net, net_power_rank, net_power_slot, restricted_net
from .group import Box, get_group
from .tiling import TilingTower, TowerConfig, build_tower, folner_set

SCHEMA_VERSION = 1


class PlannerError(ValueError):
    """Raised when a step cannot be planned; `tag` names the violated condition."""

    def __init__(self, message, tag=None):
        super().__init__(message)
        self.tag = tag


class TowerExhausted(PlannerError):
    pass


class InfeasibleStep(PlannerError):
    pass


class DomainError(ValueError):
    pass


# -- configuration ----------------------------------------------------------


def _halving(k):
    return Fraction(1, 2**k)


DELTA_SCHEDULES: dict[str, Callable[[int], Fraction]] = {
    "halving": _halving,
    "thirds": lambda k: Fraction(1, 3**k),
}


@dataclass(frozen=True)
class ConstructionConfig:
    group: str = "Z"
    d: int = 1
    growth: int = 4
    anchor: int = 1
    depth: int = 3
    delta: str = "halving"
    deltas: tuple = ()  # explicit delta_1, delta_2, ... overriding the schedule
    n_max: int = 10**6
    net_profile: str = "dyadic"  # "restricted" is the non-conforming test profile
    scan_levels: int = 64

    def delta_k(self, k: int) -> Fraction:
        if self.deltas:
            if k > len(self.deltas):
                raise PlannerError(f"no delta given for step {k}")
            return Fraction(self.deltas[k - 1])
        try:
            return DELTA_SCHEDULES[self.delta](k)
        except KeyError:
            raise PlannerError(f"unknown delta schedule {self.delta!r}") from None

    def net_at(self, level: int) -> Net:
        if self.net_profile == "dyadic":
            return net(level)
        if self.net_profile == "restricted":
            return restricted_net(level)
        raise PlannerError(f"unknown net profile {self.net_profile!r}")

    @property
    def conforming(self) -> bool:
        return self.net_profile == "dyadic"

    def tower_config(self) -> TowerConfig:
        return TowerConfig(self.group, self.growth, self.anchor, self.n_max)

    def validate(self, strict=True):
        get_group(self.group)
        if self.d < 1:
            raise PlannerError("d must be >= 1")
        if self.depth < 1:
            raise PlannerError("depth must be >= 1")
        prev = None
        for k in range(1, self.depth + 1):
            dk = self.delta_k(k)
            if not 0 < dk < 1:
                raise PlannerError(f"delta_{k} = {dk} must lie in (0, 1)")
            if strict and prev is not None and not dk < prev:
                raise PlannerError(f"delta must be strictly decreasing (delta_{k} = {dk} >= {prev})")
            prev = dk
        self.net_at(1)
        self.tower_config().validate()


# -- step records -----------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    """All parameters chosen at step k. Fields ending in _prev describe step k-1 objects
    (l_{k-1}, R_{k-1}, h_{k-1}, c_{k-1,1}, w_{k-1}); they are None at k = 1."""

    k: int
    n: int
    delta: Fraction
    net_level: int
    shape_size: int
    m: int
    l_prev: int | None = None
    r_size: int | None = None
    r_net_size: int | None = None
    stride: tuple | None = None
    h_prev: tuple | None = None
    c_prev: tuple | None = None
    w_stars: int | None = None
    kept: int | None = None

    def to_json(self) -> dict:
        def big(x):
            return None if x is None else _bigint.dec(x)

        def vec(v):
            return None if v is None else [_bigint.dec(x) for x in v]

        return {
            "k": self.k,
            "n": big(self.n),
            "delta": _bigint.frac_str(self.delta),
            "net_level": self.net_level,
            "shape_size": big(self.shape_size),
            "m": big(self.m),
            "l_prev": big(self.l_prev),
            "r_size": big(self.r_size),
            "r_net_size": big(self.r_net_size),
            "stride": vec(self.stride),
            "h_prev": vec(self.h_prev),
            "c_prev": vec(self.c_prev),
            "w_stars": big(self.w_stars),
            "kept": big(self.kept),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "StepRecord":
        def big(x):
            return None if x is None else _bigint.undec(x)

        def vec(v):
            return None if v is None else tuple(_bigint.undec(x) for x in v)

        return cls(
            k=int(doc["k"]),
            n=big(doc["n"]),
            delta=_bigint.parse_frac(doc["delta"]),
            net_level=int(doc["net_level"]),
            shape_size=big(doc["shape_size"]),
            m=big(doc["m"]),
            l_prev=big(doc["l_prev"]),
            r_size=big(doc["r_size"]),
            r_net_size=big(doc["r_net_size"]),
            stride=vec(doc["stride"]),
            h_prev=vec(doc["h_prev"]),
            c_prev=vec(doc["c_prev"]),
            w_stars=big(doc["w_stars"]),
            kept=big(doc["kept"]),
        )


def density_window(m: int, size: int, delta: Fraction) -> bool:
    """(1+delta)/2 < m/size <= (1+delta)/2 + 1/size, in integers."""
    num, den = delta.numerator, delta.denominator
    return 2 * den * m > (den + num) * size and 2 * den * (m - 1) <= (den + num) * size


def stars_for(size: int, delta: Fraction) -> int:
    """The unique integer m with (1+delta)/2 < m/size <= (1+delta)/2 + 1/size."""
    num, den = delta.numerator, delta.denominator
    return ((den + num) * size) // (2 * den) + 1


# -- planner ----------------------------------------------------------------


def plan_step(prev: list, cfg: ConstructionConfig, tower: TilingTower) -> StepRecord:
    """Choose all parameters of step k = len(prev) + 1; every level is the smallest feasible one."""
    k = len(prev) + 1
    D = tower.dim
    delta = cfg.delta_k(k)
    if k == 1:
        for n in range(1, tower.n_max + 1):
            size = tower.side(n) ** D
            m = stars_for(size, delta)
            if m <= size:
                return StepRecord(k=1, n=n, delta=delta, net_level=1, shape_size=size, m=m)
        raise TowerExhausted(f"tower exhausted; need level >= {tower.n_max + 1}", "C.1.3")

    last = prev[-1]
    n_sub, m_sub = last.n, last.m
    L_sub, a_sub = tower.side(n_sub), tower.base(n_sub)
    size_sub = L_sub**D
    N = cfg.net_at(k - 1)
    width = cfg.d * m_sub

    # |R| = |N|^width; every later level must be at least log_b of that, so refuse early.
    need_log2 = math.log2(width) + math.log2(math.log(N.size) / math.log(cfg.growth))
    if need_log2 > math.log2(tower.n_max):
        need = f"2^{need_log2:.1f}" if need_log2 > 60 else str(n_sub + round(2**need_log2))
        raise TowerExhausted(
            f"tower exhausted; need level >= ~{need} at step {k}"
            f" (|R_{k-1}| = {N.size}^{_approx(width)}, n_max = {tower.n_max})",
            f"B.{k}.3",
        )
    r_size = N.size**width
    stride = (L_sub,) + (0,) * (D - 1)
    h = (r_size * L_sub,) + (0,) * (D - 1)

    # S_{n_{k-1}} (R u {h}) spans [a', a' + (|R|+1) L') on axis 0 and [a', a' + L') elsewhere.
    span_hi = a_sub + (r_size + 1) * L_sub

    def holds_span(lv):
        return tower.base(lv) <= a_sub and tower.right_end(lv) >= span_hi

    l = _smallest_level(holds_span, n_sub + 1, tower.n_max, cfg.scan_levels)
    if l is None:
        raise TowerExhausted(f"tower exhausted at step {k}: no level holds S(R u h)", f"B.{k}.3")
    L_l = tower.side(l)
    size_l = L_l**D
    in_w = size_l // size_sub
    w_stars = (in_w - r_size) * m_sub

    H = tuple(sum(col) for col in zip(*([p.h_prev for p in prev[1:]] + [h])))
    g = tower.group.enumerate(k - 1)
    target = tuple(a + b for a, b in zip(g, H))
    delta_prev = last.delta

    # inherited stars must be dense enough or no later level can satisfy (C.k.3)
    if not 2 * m_sub * delta.denominator > (delta.denominator + delta.numerator) * size_sub:
        raise InfeasibleStep(
            f"step {k}: inherited star density {m_sub}/{size_sub} <= (1+delta_{k})/2 = {(1 + delta) / 2};"
            " (C.k.3) cannot be met at any level",
            f"C.{k}.3",
        )

    def failures(n):
        out = []
        L, a = tower.side(n), tower.base(n)
        size = L**D
        if not all(a <= x < a + L for x in target):
            out.append(f"B.{k}.1")
        num, den = delta.numerator, delta.denominator
        if not (L + 2 * (k - 1)) ** D * den < (den + num) * size:
            out.append(f"B.{k}.2")
        if not (a <= tower.base(l) and tower.right_end(l) <= a + L):
            out.append(f"B.{k}.3")
        outside = (size - size_l) // size_sub
        pn, pd = delta_prev.numerator, delta_prev.denominator
        if not 2 * pd * outside * m_sub > (pd + pn) * size:
            out.append(f"B.{k}.4")
        m = stars_for(size, delta)
        kept = m - w_stars
        if not 0 <= kept <= outside * m_sub:
            out.append(f"C.{k}.3")
        return out

    n = _smallest_level(lambda lv: not failures(lv), l, tower.n_max, cfg.scan_levels)
    if n is None:
        raise TowerExhausted(
            f"tower exhausted at step {k}; conditions {failures(tower.n_max)} still fail at level {tower.n_max}",
            failures(tower.n_max)[0],
        )
    size = tower.side(n) ** D
    m = stars_for(size, delta)
    return StepRecord(
        k=k, n=n, delta=delta, net_level=k, shape_size=size, m=m,
        l_prev=l, r_size=r_size, r_net_size=N.size, stride=stride, h_prev=h,
        c_prev=(0,) * D, w_stars=w_stars, kept=m - w_stars,
    )


def _approx(x) -> str:
    if isinstance(x, int) and x.bit_length() > 64:
        return f"2^{math.log2(x):.1f}"
    if isinstance(x, float) and x > 2**64:
        return f"2^{math.log2(x):.1f}"
    return str(round(x)) if isinstance(x, float) else str(x)


def _smallest_level(pred, lo, hi, scan):
    """Smallest lv in [lo, hi] with pred(lv); pred is monotone beyond the first `scan` levels."""
    if lo > hi:
        return None
    top = min(hi, lo + scan - 1)
    for lv in range(lo, top + 1):
        if pred(lv):
            return lv
    if top == hi:
        return None
    # gallop then bisect
    step, prev_bad, cand = 1, top, None
    while True:
        probe = min(hi, top + step)
        if pred(probe):
            cand = probe
            break
        prev_bad = probe
        if probe == hi:
            return None
        step *= 2
    lo_, hi_ = prev_bad, cand
    while hi_ - lo_ > 1:
        mid = (lo_ + hi_) // 2
        if pred(mid):
            hi_ = mid
        else:
            lo_ = mid
    return hi_


# -- lazy patterns ----------------------------------------------------------


@dataclass(frozen=True)
class _Geom:
    """Tile bookkeeping for S_{n_k} seen as a grid of level-n_{k-1} tiles."""

    a: int
    L: int
    a_sub: int
    L_sub: int
    per_axis: int
    w_lo: tuple
    w_hi: tuple
    r_lo: tuple
    r_hi: tuple
    m_sub: int
    kept: int
    net: Net
    d: int

    def index(self, g):
        return tuple((x - self.a) // self.L_sub for x in g)

    def local(self, g, idx):
        return tuple(x - self.a - i * self.L_sub + self.a_sub for x, i in zip(g, idx))

    def in_w(self, idx):
        return all(lo <= i < hi for lo, i, hi in zip(self.w_lo, idx, self.w_hi))

    def in_r(self, idx):
        return all(lo <= i < hi for lo, i, hi in zip(self.r_lo, idx, self.r_hi))

    def before(self, idx):
        """(plain w-block tiles, outside tiles) strictly before idx in row-major order."""
        D = len(idx)
        total = _box_before((0,) * D, (self.per_axis,) * D, idx)
        in_w = _box_before(self.w_lo, self.w_hi, idx)
        in_r = _box_before(self.r_lo, self.r_hi, idx)
        return in_w - in_r, total - in_w

    def stars_before(self, idx):
        plain, outside = self.before(idx)
        return plain * self.m_sub + min(self.kept, outside * self.m_sub)


def _box_before(lo, hi, idx):
    """Multi-indices of the box [lo, hi) that precede idx in row-major order."""
    if not lo:
        return 0
    inner = 1
    for a, b in zip(lo[1:], hi[1:]):
        inner *= b - a
    n = (min(max(idx[0], lo[0]), hi[0]) - lo[0]) * inner
    if lo[0] <= idx[0] < hi[0]:
        n += _box_before(lo[1:], hi[1:], idx[1:])
    return n


def _last_row_at_most(G: _Geom, prefix, axis, rank):
    """Largest i with stars_before(prefix + (i, 0, ...)) <= rank.

    Plain and outside tile counts are linear in i between box edges on this
    axis; the kept-star cap adds at most one kink per piece. Each linear
    piece is inverted by one division, so this stays exact and cheap even
    when the grid has 4^300000 tiles per axis.
    """
    tail = (0,) * (len(G.w_lo) - axis - 1)
    t = G.per_axis
    cuts = sorted({0, t, *(min(max(x, 0), t) for x in (G.w_lo[axis], G.w_hi[axis], G.r_lo[axis], G.r_hi[axis]))})
    m, kept = G.m_sub, G.kept

    def counts(i):
        return G.before(prefix + (i,) + tail)

    best = 0
    for a, b in zip(cuts, cuts[1:]):
        (pa, oa), (pb, ob) = counts(a), counts(b)
        p, q = (pb - pa) // (b - a), (ob - oa) // (b - a)
        pieces = [(a, b)]
        if q > 0 and oa * m < kept < ob * m:
            kink = a + -(-(kept - oa * m) // (q * m))
            pieces = [(a, kink), (kink, b)]
        for lo, hi in pieces:
            P, O = pa + p * (lo - a), oa + q * (lo - a)
            start = P * m + min(kept, O * m)
            if start > rank:
                return best
            slope = p * m + (q * m if O * m < kept else 0)
            last = hi - 1 if slope == 0 else min(hi - 1, lo + (rank - start) // slope)
            best = last
            if last < hi - 1:
                return best
    return best


@dataclass
class PatternOracle:
    """Coordinate-queryable pattern; `domain` None means all of G."""

    tag: str
    domain: Box | None
    evaluator: Callable = field(repr=False)

    def __call__(self, g):
        g = tuple(g)
        if self.domain is not None and g not in self.domain:
            raise DomainError(f"{g} outside the domain of {self.tag}")
        return self.evaluator(g)


@dataclass(frozen=True)
class BlockFamilyDescriptor:
    """B_{k,i}: every filling of the stars of x_{k,i} by points of P^d."""

    k: int
    i: int
    base_pattern: PatternOracle
    star_count: int
    d: int

    @property
    def dim_count(self) -> int:
        return self.d * self.star_count


@dataclass(frozen=True)
class JT:
    k: int
    j_size: int
    t_size: int
    in_J: Callable
    in_T: Callable


class Construction:
    """A planned run: step records plus lazy oracles over them."""

    def __init__(self, cfg: ConstructionConfig, steps, tower: TilingTower | None = None):
        self.cfg = cfg
        self.steps = list(steps)
        self.tower = tower or build_tower(cfg.tower_config())
        self.group = self.tower.group
        self.D = self.group.dim
        self.d = cfg.d
        self._geoms = {k: self._geom(k) for k in range(2, self.depth + 1)}
        self._base = self._base_order()

    @classmethod
    def plan(cls, cfg: ConstructionConfig, strict=True) -> "Construction":
        cfg.validate(strict=strict)
        tower = build_tower(cfg.tower_config())
        steps = []
        for _ in range(cfg.depth):
            steps.append(plan_step(steps, cfg, tower))
        return cls(cfg, steps, tower)

    @property
    def depth(self) -> int:
        return len(self.steps)

    def step(self, k) -> StepRecord:
        if not 1 <= k <= self.depth:
            raise DomainError(f"step {k} not planned (depth {self.depth})")
        return self.steps[k - 1]

    def shape(self, k) -> Box:
        return self.tower.shape(self.step(k).n)

    def w_shape(self, k) -> Box:
        """S_{l_{k-1}}, the domain of w_{k-1} (k >= 2)."""
        return self.tower.shape(self.step(k).l_prev)

    def _geom(self, k) -> _Geom:
        st, sub = self.step(k), self.step(k - 1)
        tw = self.tower
        a, L = tw.base(st.n), tw.side(st.n)
        a_sub, L_sub = tw.base(sub.n), tw.side(sub.n)
        a_l, L_l = tw.base(st.l_prev), tw.side(st.l_prev)
        D = self.D
        u = (a_l - a) // L_sub
        o = (a_sub - a) // L_sub
        j_stride = st.stride[0] // L_sub
        return _Geom(
            a=a, L=L, a_sub=a_sub, L_sub=L_sub, per_axis=L // L_sub,
            w_lo=(u,) * D, w_hi=(u + L_l // L_sub,) * D,
            r_lo=(o,) * D, r_hi=(o + st.r_size * j_stride,) + (o + 1,) * (D - 1),
            m_sub=sub.m, kept=st.kept, net=self.cfg.net_at(k - 1), d=self.d,
        )

    def _base_order(self) -> dict:
        S = self.shape(1)
        if S.size > 2**22:
            raise PlannerError("first-step shape too large to order explicitly")
        pts = sorted(S, key=self.group.rank)
        self._base_by_rank = pts
        return {p: i for i, p in enumerate(pts)}

    def _base_value(self, phi) -> tuple:
        return tuple(ConePoint(phi % 3, 1) for _ in range(self.d))

    # recursive descent -----------------------------------------------------

    def _x(self, k, g):
        """(symbol, star rank or None) of x_{k,1} at g in S_{n_k}."""
        if k == 1:
            phi = self._base[g]
            if phi < self.steps[0].m:
                return STAR, phi
            return self._base_value(phi), None
        G = self._geoms[k]
        idx = G.index(g)
        sym, rank = self._x(k - 1, G.local(g, idx))
        if G.in_r(idx):
            if sym is STAR:
                j = idx[0] - G.r_lo[0]
                return net_power_slot(G.net, G.m_sub, j, rank, self.d), None
            return sym, None
        if sym is not STAR:
            return sym, None
        if G.in_w(idx):
            return STAR, G.stars_before(idx) + rank
        plain, outside = G.before(idx)
        pos = outside * G.m_sub + rank
        if pos < G.kept:
            return STAR, plain * G.m_sub + pos
        return apex_tuple(self.d), None

    def _w(self, k, g):
        """w_{k-1} at g in S_{l_{k-1}}, located through tile centers rather than grid indices."""
        st, sub = self.step(k), self.step(k - 1)
        a_sub, L_sub = self.tower.base(sub.n), self.tower.side(sub.n)
        c = tuple(L_sub * ((x - a_sub) // L_sub) for x in g)
        local = tuple(x - y for x, y in zip(g, c))
        sym, rank = self._x(k - 1, local)
        j, rem = divmod(c[0], st.stride[0])
        in_r = rem == 0 and 0 <= j < st.r_size and all(x == 0 for x in c[1:])
        if in_r and sym is STAR:
            return net_power_slot(self.cfg.net_at(k - 1), sub.m, j, rank, self.d)
        return sym

    def star_position(self, k, rank):
        """Inverse of the star ranking: the position in S_{n_k} of the rank-th star of x_{k,1}."""
        if not 0 <= rank < self.count_stars(k):
            raise DomainError(f"no star of rank {rank} in x_{k},1")
        if k == 1:
            return self._base_by_rank[rank]
        G = self._geoms[k]
        idx = ()
        for axis in range(self.D):
            idx += (_last_row_at_most(G, idx, axis, rank),)
        local = self.star_position(k - 1, rank - G.stars_before(idx))
        return tuple(x - G.a_sub + G.a + i * G.L_sub for x, i in zip(local, idx))

    def x_value(self, k, g):
        return self._x(k, tuple(g))[0]

    def star_rank(self, k, g):
        sym, rank = self._x(k, tuple(g))
        return rank if sym is STAR else None

    # public oracles --------------------------------------------------------

    def x(self, k) -> PatternOracle:
        """x_{k,1} on S_{n_k}."""
        return PatternOracle(f"x_{k},1", self.shape(k), lambda g: self._x(k, g)[0])

    def w(self, k) -> PatternOracle:
        """w_{k-1}, the pattern on S_{l_{k-1}} built at step k."""
        if k < 2:
            raise DomainError("w_{k-1} exists for k >= 2")
        return PatternOracle(f"w_{k - 1}", self.w_shape(k), lambda g: self._w(k, g))

    def x_global(self, k) -> PatternOracle:
        """x_k on G: x_{k,1} copied onto every level-n_k tile."""
        tiling = self.tower.level(self.step(k).n)

        def ev(g):
            c = tiling.center_of(g)
            return self._x(k, tuple(a - b for a, b in zip(g, c)))[0]

        return PatternOracle(f"x_{k}", None, ev)

    def z(self, horizon=None) -> PatternOracle:
        """The limit point, read at a horizon: a P^d value, or * while still undetermined."""
        horizon = horizon or self.depth
        self.step(horizon)
        xg = self.x_global(horizon)
        return PatternOracle(f"z@{horizon}", None, xg.evaluator)

    def z_value(self, g, horizon=None):
        return self.z(horizon)(g)

    def star_positions(self, k, i=0):
        """(oracle g -> is star, exact star count) for x_{k,1}."""
        if i != 0:
            raise DomainError("towers have a single shape")
        return PatternOracle(f"stars(x_{k},1)", self.shape(k), lambda g: self._x(k, g)[0] is STAR), self.count_stars(k)

    def block_family(self, k, i=0) -> BlockFamilyDescriptor:
        if i != 0:
            raise DomainError("towers have a single shape")
        return BlockFamilyDescriptor(k, i, self.x(k), self.count_stars(k), self.d)

    def count_stars(self, k) -> int:
        """Stars of x_{k,1}, recounted from the tile structure (not read from the record)."""
        if k == 1:
            m = self.steps[0].m
            return sum(1 for phi in self._base.values() if phi < m)
        G = self._geoms[k]
        sub = self.count_stars(k - 1)
        D = self.D
        total = G.per_axis**D
        in_w = _box_before(G.w_lo, G.w_hi, (G.per_axis,) + (0,) * (D - 1))
        in_r = _box_before(G.r_lo, G.r_hi, (G.per_axis,) + (0,) * (D - 1))
        return (in_w - in_r) * sub + min(G.kept, (total - in_w) * sub)

    # J_k and T_k -----------------------------------------------------------

    def H(self, k) -> tuple:
        """h_1 + ... + h_k (the identity for k = 0)."""
        out = (0,) * self.D
        for j in range(2, k + 2):
            out = tuple(a + b for a, b in zip(out, self.step(j).h_prev))
        return out

    def in_T(self, k, g) -> bool:
        Hk = self.H(k - 1)
        return tuple(a + b for a, b in zip(g, Hk)) in self.shape(k)

    def j_rank(self, k, g):
        """Star rank of g in J_k, or None when g is not in J_k."""
        Hk = self.H(k - 1)
        p = tuple(a + b for a, b in zip(g, Hk))
        if p not in self.shape(k):
            return None
        sym, rank = self._x(k, p)
        return rank if sym is STAR else None

    def in_J(self, k, g) -> bool:
        return self.j_rank(k, g) is not None

    def j_and_t(self, k) -> JT:
        st = self.step(k)
        return JT(k, self.count_stars(k), st.shape_size, lambda g: self.in_J(k, g), lambda g: self.in_T(k, g))

    def T_box(self, k) -> Box:
        Hk = self.H(k - 1)
        return self.shape(k).translate(tuple(-x for x in Hk))

    # serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {"schema": SCHEMA_VERSION, "steps": [s.to_json() for s in self.steps]}

    @classmethod
    def from_json(cls, cfg: ConstructionConfig, doc: dict) -> "Construction":
        if doc.get("schema") != SCHEMA_VERSION:
            raise PlannerError(f"unsupported steps schema {doc.get('schema')!r}")
        return cls(cfg, [StepRecord.from_json(s) for s in doc["steps"]])


# -- independent re-verification -------------------------------------------


@dataclass
class ConditionResult:
    tag: str
    ok: bool
    checked: int = 0
    detail: str = ""
    witness: object = None


@dataclass
class StepReport:
    k: int
    results: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def failed(self) -> list:
        return [r for r in self.results if not r.ok]


def _rand_point(rng, box: Box):
    return tuple(rng.randrange(a, b) for a, b in zip(box.lo, box.hi))


def verify_step_conditions(con: Construction, k: int, samples: int = 200, seed: int = 0) -> StepReport:
    """Re-check (A.k.*), (B.k.*), (C.k.*) for step k from the records and oracles.

    Arithmetic conditions are exact. Pattern conditions compare oracles at
    `samples` random coordinates each, using tile centers computed here rather
    than the grid indices the oracle uses internally.
    """
    rng = random.Random(f"{seed}:{k}")
    st = con.step(k)
    tw = con.tower
    D = con.D
    out = []
    S = con.shape(k)

    def add(tag, ok, checked=0, detail="", witness=None):
        out.append(ConditionResult(tag, bool(ok), checked, detail, witness))

    stars = con.count_stars(k)
    win = density_window(stars, S.size, st.delta)
    add(f"C.{k}.3", win and stars == st.m and S.size == st.shape_size, 1,
        f"stars={_approx(stars)} recorded m={_approx(st.m)} |S|={_approx(S.size)} delta={st.delta}")
    if k == 1:
        add("e in S_{n_1}", (0,) * D in S, 1)
        return StepReport(k, out)

    sub = con.step(k - 1)
    S_sub, L_sub, a_sub = con.shape(k - 1), tw.side(sub.n), tw.base(sub.n)
    S_l = con.w_shape(k)
    N = con.cfg.net_at(k - 1)
    stride, h, r = st.stride, st.h_prev, st.r_size

    def r_index(c):
        """j when c = j * stride with 0 <= j < |R|, else None."""
        if any(x != 0 for x in c[1:]) or stride[0] == 0:
            return None
        j, rem = divmod(c[0], stride[0])
        return j if rem == 0 and 0 <= j < r else None

    # R_{k-1}, h_{k-1}
    problems = []
    if r != N.size ** (con.d * sub.m):
        problems.append("|R| != |P|^(d m)")
    if any(x % L_sub for x in stride):
        problems.append("R not inside C(S_{n_{k-1}})")
    if r_index(h) is not None:
        problems.append("h in R")
    if any(x % L_sub for x in h):
        problems.append("h not a center")
    span = Box((a_sub,) * D, (a_sub + (r + 1) * L_sub,) + (a_sub + L_sub,) * (D - 1))
    if not (S_l.contains_box(span) and S_l.contains_box(S_sub.translate(h))):
        problems.append("S(R u h) not inside S_l")
    add(f"R.{k - 1}", not problems, 1, "; ".join(problems) or f"|R|={_approx(r)}")

    # (A.k.1)/(A.k.2): R-blocks carry x_{k-1,1} off its stars and the j-th tuple on them
    bad1, bad2, n1, n2 = None, None, 0, 0
    for i in range(samples):
        j = 0 if i == 0 else (r - 1 if i == 1 else rng.randrange(r))
        loc = _rand_point(rng, S_sub)
        g = tuple(a + j * s for a, s in zip(loc, stride))
        got = con._w(k, g)
        base, rank = con._x(k - 1, loc)
        if base is STAR:
            n2 += 1
            want = net_power_slot(N, sub.m, j, rank, con.d)
            if got != want:
                bad2 = bad2 or {"g": g, "j": j, "got": got, "want": want}
        else:
            n1 += 1
            if got != base:
                bad1 = bad1 or {"g": g, "got": got, "want": base}
    add(f"A.{k}.1", bad1 is None, n1, "R-block coordinates off the stars of x_{k-1,1}", bad1)

    # bijection: decode whole R-blocks when affordable and re-encode
    full = 0
    if S_sub.size <= 2**16:
        star_pts = sorted((p for p in S_sub if con._x(k - 1, p)[0] is STAR), key=lambda p: con._x(k - 1, p)[1])
        for j in {0, r - 1, rng.randrange(r), rng.randrange(r)}:
            vals = [con._w(k, tuple(a + j * s for a, s in zip(p, stride))) for p in star_pts]
            if net_power_rank(N, vals, con.d) != j:
                bad2 = bad2 or {"j": j, "reason": "block does not decode to its own index"}
            full += 1
    add(f"A.{k}.2", bad2 is None, n2 + full, f"{n2} slots, {full} whole blocks decoded", bad2)

    # (A.k.3): other tiles of the w-block are copies of x_{k-1,1}, stars included
    bad, n3 = None, 0
    tries = 0
    while n3 < samples and tries < 50 * samples:
        tries += 1
        g = _rand_point(rng, S_l)
        c = tuple(L_sub * ((x - a_sub) // L_sub) for x in g)
        if r_index(c) is not None:
            continue
        n3 += 1
        loc = tuple(x - y for x, y in zip(g, c))
        if con._w(k, g) != con._x(k - 1, loc)[0]:
            bad = bad or {"g": g, "center": c}
    add(f"A.{k}.3", bad is None and n3 > 0, n3, "", bad)

    # (B.k.1)
    H = con.H(k - 1)
    target = tuple(a + b for a, b in zip(tw.group.enumerate(k - 1), H))
    add(f"B.{k}.1", target in S, 1, f"g_{k-1} h_1..h_{k-1} in S_{{n_{k}}}")

    # (B.k.2)
    F = folner_set(tw.group, k - 1)
    FS = (S.sides[0] + F.sides[0] - 1) ** D
    dn, dd = st.delta.numerator, st.delta.denominator
    add(f"B.{k}.2", FS * dd < (dd + dn) * S.size, 1, f"|F_{k-1} S| = {_approx(FS)}")

    # (B.k.3)
    add(f"B.{k}.3", S.contains_box(S_l) and all(x == 0 for x in st.c_prev), 1)

    # (B.k.4): stars of x_{k-1} on S_{n_k} minus the w-block, tile by tile
    outside_tiles = (S.size - S_l.size) // S_sub.size
    inherited = outside_tiles * con.count_stars(k - 1)
    pd, pn = sub.delta.denominator, sub.delta.numerator
    add(f"B.{k}.4", 2 * pd * inherited > (pd + pn) * S.size, 1, f"inherited stars {_approx(inherited)}")

    # (C.k.1): x_{k,1} restricted to S_l is w_{k-1}
    bad = None
    for _ in range(samples):
        g = _rand_point(rng, S_l)
        if con._x(k, g)[0] != con._w(k, g):
            bad = bad or {"g": g}
    add(f"C.{k}.1", bad is None, samples, "", bad)

    # (C.k.2): outside tiles keep x_{k-1,1} off its stars; its stars become * or the apex
    bad, n5, tries = None, 0, 0
    while n5 < samples and tries < 50 * samples:
        tries += 1
        g = _rand_point(rng, S)
        if g in S_l:
            continue
        n5 += 1
        c = tuple(L_sub * ((x - a_sub) // L_sub) for x in g)
        base = con._x(k - 1, tuple(x - y for x, y in zip(g, c)))[0]
        got = con._x(k, g)[0]
        ok = got == base if base is not STAR else (got is STAR or got == apex_tuple(con.d))
        if not ok:
            bad = bad or {"g": g, "got": got, "want": base}
    add(f"C.{k}.2", bad is None and n5 > 0, n5, "", bad)
    return StepReport(k, out)
