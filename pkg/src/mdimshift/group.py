"""Countable groups Z and Z^2 with exact finite-subset algebra.

Group elements are plain tuples of Python ints (length 1 for Z, 2 for Z^2),
so coordinates never overflow. The group law is written additively; what the
construction calls right-multiplication `Fg` is `F + g` here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from ._bigint import ratio

Element = tuple


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeGroup:
    """Z^dim with a fixed enumeration g_1, g_2, ...

    Z is enumerated 0, 1, -1, 2, -2, ...; Z^2 shell by shell in the
    l-infinity norm, lexicographically inside each shell.
    """

    dim: int
    name: str

    @property
    def identity(self) -> Element:
        return (0,) * self.dim

    def compose(self, a: Element, b: Element) -> Element:
        return tuple(x + y for x, y in zip(a, b))

    def invert(self, a: Element) -> Element:
        return tuple(-x for x in a)

    def enumerate(self, index: int) -> Element:
        if index < 1:
            raise GroupError("enumeration is 1-based")
        if self.dim == 1:
            if index == 1:
                return (0,)
            return (index // 2,) if index % 2 == 0 else (-(index // 2),)
        if self.dim == 2:
            return _spiral_element(index - 1)
        raise GroupError(f"no enumeration for dim {self.dim}")

    def rank(self, g: Element) -> int:
        """Inverse of enumerate."""
        if self.dim == 1:
            (x,) = g
            if x == 0:
                return 1
            return 2 * x if x > 0 else -2 * x + 1
        if self.dim == 2:
            return _spiral_rank(g) + 1
        raise GroupError(f"no enumeration for dim {self.dim}")

    def ball(self, radius: int) -> "Box":
        """Closed l-infinity ball of the given radius around the identity."""
        return Box((-radius,) * self.dim, (radius + 1,) * self.dim)


def _spiral_element(i: int) -> Element:
    if i == 0:
        return (0, 0)
    r = 1
    while (2 * r + 1) ** 2 <= i:
        r += 1
    p = i - (2 * r - 1) ** 2
    row = 2 * r + 1
    if p < row:
        return (-r, -r + p)
    p -= row
    if p < 2 * (2 * r - 1):
        x = -r + 1 + p // 2
        return (x, -r if p % 2 == 0 else r)
    p -= 2 * (2 * r - 1)
    return (r, -r + p)


def _spiral_rank(g: Element) -> int:
    x, y = g
    r = max(abs(x), abs(y))
    if r == 0:
        return 0
    base = (2 * r - 1) ** 2
    row = 2 * r + 1
    if x == -r:
        return base + (y + r)
    if x == r:
        return base + row + 2 * (2 * r - 1) + (y + r)
    return base + row + 2 * (x + r - 1) + (0 if y == -r else 1)


Z = LatticeGroup(1, "Z")
Z2 = LatticeGroup(2, "Z2")
GROUPS = {"Z": Z, "Z2": Z2}


def get_group(name: str) -> LatticeGroup:
    try:
        return GROUPS[name]
    except KeyError:
        raise GroupError(f"unsupported group id {name!r}; expected one of {sorted(GROUPS)}") from None


# -- finite subsets ---------------------------------------------------------


class FiniteSubset:
    """A finite subset of Z^dim. `size` is exact; use it instead of len()."""

    dim: int

    @property
    def size(self) -> int:
        raise NotImplementedError

    def __contains__(self, g) -> bool:
        raise NotImplementedError

    def __iter__(self) -> Iterator[Element]:
        raise NotImplementedError

    def points(self) -> frozenset:
        return frozenset(iter(self))

    def translate(self, g: Element) -> "FiniteSubset":
        raise NotImplementedError

    def is_empty(self) -> bool:
        return self.size == 0


@dataclass(frozen=True)
class Box(FiniteSubset):
    """Half-open box [lo_0, hi_0) x ... with exact big-integer endpoints."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise GroupError("box endpoints disagree in dimension")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def sides(self) -> tuple:
        return tuple(max(0, b - a) for a, b in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        n = 1
        for s in self.sides:
            n *= s
        return n

    def __contains__(self, g) -> bool:
        return all(a <= x < b for a, x, b in zip(self.lo, g, self.hi))

    def __iter__(self):
        if self.is_empty():
            return iter(())
        return itertools.product(*(range(a, b) for a, b in zip(self.lo, self.hi)))

    def translate(self, g):
        return Box(tuple(a + x for a, x in zip(self.lo, g)), tuple(b + x for b, x in zip(self.hi, g)))

    def contains_box(self, other: "Box") -> bool:
        if other.is_empty():
            return True
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def intersect(self, other: "Box") -> "Box":
        return Box(tuple(map(max, self.lo, other.lo)), tuple(map(min, self.hi, other.hi)))

    def __repr__(self):
        if self.dim == 1:
            return f"[{self.lo[0]}, {self.hi[0]})"
        return " x ".join(f"[{a}, {b})" for a, b in zip(self.lo, self.hi))


@dataclass(frozen=True)
class PointSet(FiniteSubset):
    elements: frozenset
    dim: int

    @classmethod
    def of(cls, points: Iterable, dim: int | None = None) -> "PointSet":
        pts = frozenset(tuple(p) for p in points)
        if dim is None:
            if not pts:
                raise GroupError("dimension of an empty point set must be given")
            dim = len(next(iter(pts)))
        return cls(pts, dim)

    @property
    def size(self) -> int:
        return len(self.elements)

    def __contains__(self, g) -> bool:
        return tuple(g) in self.elements

    def __iter__(self):
        return iter(sorted(self.elements))

    def translate(self, g):
        return PointSet(frozenset(tuple(a + x for a, x in zip(p, g)) for p in self.elements), self.dim)


@dataclass(frozen=True)
class BoxDifference(FiniteSubset):
    """outer minus inner, with inner contained in outer (inner may be empty)."""

    outer: Box
    inner: Box

    @property
    def dim(self) -> int:
        return self.outer.dim

    @property
    def size(self) -> int:
        return self.outer.size - self.inner.size

    def __contains__(self, g) -> bool:
        return g in self.outer and g not in self.inner

    def __iter__(self):
        return (g for g in self.outer if g not in self.inner)

    def translate(self, g):
        return BoxDifference(self.outer.translate(g), self.inner.translate(g))


def as_explicit(F: FiniteSubset) -> PointSet:
    return PointSet(F.points(), F.dim)


def same_set(A: FiniteSubset, B: FiniteSubset) -> bool:
    if A.size != B.size:
        return False
    return A.points() == B.points()


# -- operations -------------------------------------------------------------


def translate(F: FiniteSubset, g: Element) -> FiniteSubset:
    """{f + g : f in F}."""
    return F.translate(g)


def product_set(A: FiniteSubset, B: FiniteSubset) -> FiniteSubset:
    """{a + b : a in A, b in B}; boxes stay boxes."""
    if isinstance(A, Box) and isinstance(B, Box):
        if A.is_empty() or B.is_empty():
            return Box((0,) * A.dim, (0,) * A.dim)
        return Box(tuple(a + b for a, b in zip(A.lo, B.lo)), tuple(a + b - 1 for a, b in zip(A.hi, B.hi)))
    return PointSet(frozenset(tuple(x + y for x, y in zip(a, b)) for a in A for b in B), A.dim)


def boundary(F: FiniteSubset, T: FiniteSubset) -> FiniteSubset:
    """B(F, T): all g such that T + g meets both F and its complement."""
    if T.is_empty():
        raise GroupError("T must be nonempty")
    if isinstance(F, Box) and isinstance(T, Box):
        return _box_boundary(F, T)
    return _scan_boundary(F, T)


def _box_boundary(F: Box, T: Box) -> FiniteSubset:
    if F.is_empty():
        return Box(F.lo, F.lo)
    # T+g meets F  <=>  g in [F.lo - T.hi + 1, F.hi - T.lo)
    meets = Box(tuple(p - t1 + 1 for p, t1 in zip(F.lo, T.hi)), tuple(q - t0 for q, t0 in zip(F.hi, T.lo)))
    # T+g inside F  <=>  g in [F.lo - T.lo, F.hi - T.hi]
    inside = Box(tuple(p - t0 for p, t0 in zip(F.lo, T.lo)), tuple(q - t1 + 1 for q, t1 in zip(F.hi, T.hi)))
    if inside.is_empty():
        return meets
    return BoxDifference(meets, inside)


def _scan_boundary(F: FiniteSubset, T: FiniteSubset) -> PointSet:
    fpts = F.points()
    tpts = list(T)
    candidates = {tuple(f - t for f, t in zip(fp, tp)) for fp in fpts for tp in tpts}
    out = set()
    for g in candidates:
        shifted = [tuple(t + x for t, x in zip(tp, g)) for tp in tpts]
        if any(p not in fpts for p in shifted):
            out.add(g)
    return PointSet(frozenset(out), F.dim)


def invariance_ratio(F: FiniteSubset, T: FiniteSubset) -> Fraction:
    """|B(F,T)| / |F|; F is (T, eps)-invariant iff this is < eps."""
    if F.is_empty():
        raise GroupError("F must be nonempty")
    return ratio(boundary(F, T).size, F.size)


def is_invariant(F: FiniteSubset, T: FiniteSubset, eps) -> bool:
    eps = Fraction(eps)
    return boundary(F, T).size * eps.denominator < eps.numerator * F.size
