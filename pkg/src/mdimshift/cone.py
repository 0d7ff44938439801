"""The alphabet: the cone P over three points, its nets, and window metrics.

A point of P is (branch, t) with t in [0, 1]; t = 0 is the apex shared by all
three branches. Distances are graph distances with unit edges, so everything
stays in exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from . import _bigint
from .group import Box, FiniteSubset, LatticeGroup, get_group


class ConeError(ValueError):
    pass


@dataclass(frozen=True)
class ConePoint:
    branch: int
    t: Fraction

    def __post_init__(self):
        t = Fraction(self.t)
        if not 0 <= t <= 1:
            raise ConeError(f"t={t} outside [0, 1]")
        if self.branch not in (0, 1, 2):
            raise ConeError(f"branch {self.branch} not in {{0, 1, 2}}")
        object.__setattr__(self, "t", t)
        if t == 0:
            object.__setattr__(self, "branch", 0)

    def to_json(self) -> dict:
        return {"branch": self.branch, "t": f"{self.t.numerator}/{self.t.denominator}"}

    @classmethod
    def from_json(cls, doc: dict) -> "ConePoint":
        return cls(int(doc["branch"]), _bigint.parse_frac(doc["t"]))

    def __repr__(self):
        return "apex" if self.t == 0 else f"({self.branch}, {self.t})"


APEX = ConePoint(0, Fraction(0))
DIAMETER = Fraction(2)


class _Star:
    """The placeholder symbol; a singleton."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "*"

    def __reduce__(self):
        return (_Star, ())


STAR = _Star()


def apex_tuple(d: int) -> tuple:
    return (APEX,) * d


def symbol_to_json(sym):
    if sym is STAR:
        return "*"
    return [p.to_json() for p in sym]


def symbol_from_json(doc):
    if doc == "*":
        return STAR
    return tuple(ConePoint.from_json(p) for p in doc)


def cone_distance(x: ConePoint, y: ConePoint) -> Fraction:
    if x.branch == y.branch or x.t == 0 or y.t == 0:
        return abs(x.t - y.t)
    return x.t + y.t


def linf_distance(x, y) -> Fraction:
    if len(x) != len(y):
        raise ConeError(f"length mismatch: {len(x)} vs {len(y)}")
    return max((cone_distance(a, b) for a, b in zip(x, y)), default=Fraction(0))


def symbol_distance(x, y) -> Fraction:
    """d_{l^inf} between two P^d symbols; stars have no distance."""
    if x is STAR or y is STAR:
        raise ConeError("distance to an undetermined (*) coordinate")
    return linf_distance(x, y)


# -- nets -------------------------------------------------------------------


@dataclass(frozen=True)
class Net:
    level: int
    spacing: Fraction
    points: tuple
    conforming: bool = True

    @property
    def size(self) -> int:
        return len(self.points)

    def index(self, p: ConePoint) -> int:
        return self._lookup()[p]

    def _lookup(self):
        lk = self.__dict__.get("_lk")
        if lk is None:
            lk = {p: i for i, p in enumerate(self.points)}
            object.__setattr__(self, "_lk", lk)
        return lk


@lru_cache(maxsize=None)
def net(n: int) -> Net:
    """Dyadic net of spacing 2^-n: apex, then branch-major with t ascending."""
    if n < 1:
        raise ConeError("net level must be >= 1")
    q = 2**n
    pts = [APEX] + [ConePoint(b, Fraction(k, q)) for b in range(3) for k in range(1, q + 1)]
    return Net(n, Fraction(1, q), tuple(pts))


@lru_cache(maxsize=None)
def restricted_net(n: int) -> Net:
    """Apex plus the tips of branches 0 and 1. Not 2^-n dense; test profile only."""
    return Net(n, Fraction(1, 2**n), (APEX, ConePoint(0, 1), ConePoint(1, 1)), conforming=False)


def covering_radius(N: Net) -> Fraction:
    """Largest distance from a point of P to N, computed edge by edge."""
    worst = Fraction(0)
    for b in range(3):
        ts = sorted({p.t for p in N.points if p.t == 0 or p.branch == b})
        if ts[0] != 0:
            raise ConeError("nets always contain the apex")
        for lo, hi in zip(ts, ts[1:]):
            worst = max(worst, (hi - lo) / 2)
        worst = max(worst, 1 - ts[-1])
    return worst


def _as_net(n_or_net) -> Net:
    return n_or_net if isinstance(n_or_net, Net) else net(n_or_net)


def net_power_size(n_or_net, m: int, d: int = 1) -> int:
    return _as_net(n_or_net).size ** (m * d)


def net_power_index(n_or_net, m: int, index: int, d: int = 1) -> tuple:
    """The index-th element of N^(m*d) in mixed-radix order, slot 0 most significant.

    Returned as m tuples of d points each (one P^d value per star position).
    """
    N = _as_net(n_or_net)
    width = m * d
    if not 0 <= index < N.size**width:
        raise IndexError(f"index out of range for |N|^{width}")
    digits = _bigint.to_digits(index, N.size, width)
    pts = [N.points[x] for x in digits]
    return tuple(tuple(pts[i * d:(i + 1) * d]) for i in range(m))


def net_power_rank(n_or_net, values, d: int = 1) -> int:
    """Inverse of net_power_index."""
    N = _as_net(n_or_net)
    flat = [p for v in values for p in v]
    if any(len(v) != d for v in values):
        raise ConeError("every value must have d coordinates")
    return _bigint.from_digits([N.index(p) for p in flat], N.size)


def net_power_slot(n_or_net, m: int, index: int, slot: int, d: int = 1) -> tuple:
    """Only the P^d value at star `slot` of the index-th tuple (no full decode)."""
    N = _as_net(n_or_net)
    width = m * d
    return tuple(N.points[_bigint.digit_at(index, N.size, width, slot * d + i)] for i in range(d))


# -- weights and the window metric rho --------------------------------------


@dataclass(frozen=True)
class WeightScheme:
    """alpha_g = base^-(|g_1| + ... + |g_D|); summable with geometric closed-form tails."""

    group: LatticeGroup
    base: int

    def alpha(self, g) -> Fraction:
        return Fraction(1, self.base ** sum(abs(x) for x in g))

    def _axis_total(self) -> Fraction:
        return 1 + Fraction(2, self.base - 1)

    def _axis_partial(self, R: int) -> Fraction:
        # 1 + 2 * sum_{i=1}^R base^-i
        return 1 + Fraction(2, self.base - 1) * (1 - Fraction(1, self.base**R))

    def total(self) -> Fraction:
        return self._axis_total() ** self.group.dim

    def ball_sum(self, R: int) -> Fraction:
        return self._axis_partial(R) ** self.group.dim

    def tail(self, R: int) -> Fraction:
        """sum of alpha_g over g outside the l-infinity ball of radius R."""
        return self.total() - self.ball_sum(R)


def weights_for(group) -> WeightScheme:
    if isinstance(group, str):
        group = get_group(group)
    return WeightScheme(group, 3 if group.dim == 1 else 5)


Oracle = Callable[[tuple], object]


def rho_truncated(x: Oracle, y: Oracle, R: int, weights: WeightScheme) -> tuple:
    """(lower, upper) with lower <= rho(x, y) <= upper, summing over the ball of radius R."""
    lower = Fraction(0)
    for g in weights.group.ball(R):
        a = weights.alpha(g)
        lower += a * symbol_distance(x(g), y(g))
    return lower, lower + DIAMETER * weights.tail(R)


def shifted(x: Oracle, h) -> Oracle:
    """(h x)_g = x_{g h}."""
    return lambda g: x(tuple(a + b for a, b in zip(g, h)))


def rho_F_truncated(x: Oracle, y: Oracle, F, R: int, weights: WeightScheme) -> tuple:
    """Bounds on rho_F(x, y) = max over h in F of rho(hx, hy)."""
    lows, ups = [], []
    for h in F:
        lo, up = rho_truncated(shifted(x, h), shifted(y, h), R, weights)
        lows.append(lo)
        ups.append(up)
    if not lows:
        raise ConeError("F must be nonempty")
    return max(lows), max(ups)
