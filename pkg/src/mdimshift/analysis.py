"""Finite-stage checks: almost periodicity, the two density bounds behind the
mean-dimension value, the distance-expanding maps f_k, and the arithmetic
that rules out an embedding into the cubical shift.

Every assertion is exact; huge counts are compared by cross-multiplication
and only reduced to fractions through GMP.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import _bigint
from .cone import (STAR, ConePoint, apex_tuple, cone_distance, rho_truncated, shifted, symbol_to_json,
                   weights_for)
from .construction import Construction, DomainError, density_window
from .group import Box, is_invariant
from .tiling import PreconditionError, folner_set, prop_big_proportion_constants


class UnresolvedError(ValueError):
    """A coordinate is still * at every available horizon."""


@dataclass
class Failure:
    tag: str
    detail: str
    witness: object = None


def _vec(g):
    return [_bigint.dec(x) for x in g]


# -- ratio table ------------------------------------------------------------


@dataclass
class RatioRow:
    k: int
    J: int
    T: int
    delta: Fraction
    ratio: Fraction
    lower: Fraction
    upper: Fraction
    deviation: Fraction
    ok: bool


@dataclass
class RatioReport:
    rows: list
    deviation_bound: Fraction
    deviation_ok: bool

    @property
    def ok(self):
        return self.deviation_ok and all(r.ok for r in self.rows)

    def failures(self):
        out = [Failure(f"C.{r.k}.3", f"|J_{r.k}|/|T_{r.k}| outside its window") for r in self.rows if not r.ok]
        if not self.deviation_ok:
            out.append(Failure(f"ratio(K={self.rows[-1].k})", "|ratio - 1/2| exceeds delta_K/2 + 1/|T_K|"))
        return out

    def to_json(self):
        f = _bigint.frac_str
        return {
            "rows": [
                {"k": r.k, "J": _bigint.dec(r.J), "T": _bigint.dec(r.T), "delta": f(r.delta), "ratio": f(r.ratio),
                 "lower": f(r.lower), "upper": f(r.upper), "deviation": f(r.deviation), "ok": r.ok}
                for r in self.rows
            ],
            "deviation_bound": f(self.deviation_bound),
            "deviation_ok": self.deviation_ok,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "J", "T", "delta", "ratio_float", "lower", "deviation_float", "ok"])
        for r in self.rows:
            w.writerow([r.k, _bigint.dec(r.J), _bigint.dec(r.T), _bigint.frac_str(r.delta), f"{float(r.ratio):.12f}",
                        _bigint.frac_str(r.lower), f"{float(r.deviation):.6e}", int(r.ok)])
        return buf.getvalue()


def ratio_report(con: Construction, K: int | None = None) -> RatioReport:
    K = K or con.depth
    rows = []
    for k in range(1, K + 1):
        st = con.step(k)
        J, T = con.count_stars(k), st.shape_size
        r = _bigint.ratio(J, T)
        lower = (1 + st.delta) / 2
        upper = lower + _bigint.ratio(1, T)
        rows.append(RatioRow(k, J, T, st.delta, r, lower, upper, abs(r - Fraction(1, 2)), density_window(J, T, st.delta)))
    last = rows[-1]
    bound = last.delta / 2 + _bigint.ratio(1, last.T)
    return RatioReport(rows, bound, last.deviation <= bound)


# -- non-embeddability certificate ------------------------------------------


@dataclass
class CertificateEntry:
    N: int
    k: int
    FN_S: int
    twice_J: int
    stars_ok: bool  # 2|J_k| > (1 + delta_k)|S|
    folner_ok: bool  # |F_N S| <= |F_{k-1} S| < (1 + delta_k)|S|
    passed: bool

    @property
    def tag(self):
        return f"Part4(N={self.N},k={self.k})"


@dataclass
class Certificate:
    K: int
    entries: list

    @property
    def ok(self):
        """Every pair passes and both inequalities that produce it hold."""
        return not self.failures()

    def failures(self):
        out = []
        for e in self.entries:
            why = [msg for ok, msg in ((e.passed, "2|J_k| <= |F_N S_{n_k}|"),
                                       (e.stars_ok, "2|J_k| <= (1+delta_k)|S_{n_k}|"),
                                       (e.folner_ok, "|F_{k-1} S_{n_k}| >= (1+delta_k)|S_{n_k}|")) if not ok]
            if why:
                out.append(Failure(e.tag, "; ".join(why), {"N": e.N, "k": e.k}))
        return out

    def to_json(self):
        return {
            "K": self.K,
            "entries": [
                {"N": e.N, "k": e.k, "FN_S": _bigint.dec(e.FN_S), "twice_J": _bigint.dec(e.twice_J),
                 "stars_ok": e.stars_ok, "folner_ok": e.folner_ok, "pass": e.passed}
                for e in self.entries
            ],
        }


def _product_size(S: Box, F: Box) -> int:
    n = 1
    for s, f in zip(S.sides, F.sides):
        n *= s + f - 1
    return n


def nonembed_certificate(con: Construction, K: int | None = None) -> Certificate:
    """Check 2|J_k| > |F_N S_{n_k}| for 1 <= N < k <= K, together with the two
    inequalities that produce it. The tight case N = k-1 is exactly (B.k.2)."""
    K = K or con.depth
    out = []
    for k in range(2, K + 1):
        st = con.step(k)
        S = con.shape(k)
        J2 = 2 * con.count_stars(k)
        num, den = st.delta.numerator, st.delta.denominator
        stars_ok = J2 * den > (den + num) * S.size
        F_top = _product_size(S, folner_set(con.group, k - 1))
        for N in range(1, k):
            FN = _product_size(S, folner_set(con.group, N))
            folner_ok = FN <= F_top and F_top * den < (den + num) * S.size
            out.append(CertificateEntry(N, k, FN, J2, stars_ok, folner_ok, J2 > FN))
    return Certificate(K, out)


# -- almost periodicity -----------------------------------------------------


@dataclass
class PeriodicityReport:
    m: int
    centers: list
    sites_per_center: int
    mismatch: dict | None

    @property
    def ok(self):
        return self.mismatch is None

    def to_json(self):
        mm = None
        if self.mismatch:
            mm = {"g": _vec(self.mismatch["g"]), "c": _vec(self.mismatch["c"]),
                  "z_g": symbol_to_json(self.mismatch["z_g"]), "z_gc": symbol_to_json(self.mismatch["z_gc"])}
        return {"m": self.m, "centers": len(self.centers), "sites_per_center": self.sites_per_center,
                "max_abs_stride": _bigint.dec(max(abs(j) for j in self.centers)), "mismatch": mm}


def almost_periodicity_check(con: Construction, m: int, samples: int = 100, seed: int = 0,
                             horizon: int | None = None, max_sites: int = 4096) -> PeriodicityReport:
    """Compare z on S_{n_m} with z on S_{n_m} + c for centers c of level n_{m+1}.

    Centers are j * L_{n_{m+1}} e_i-combinations with |j| up to 10 |S_{n_{m+1}}|,
    always including c = e and both extremes.
    """
    if m + 1 > con.depth:
        raise UnresolvedError(f"need depth >= {m + 1} for m = {m}")
    horizon = horizon or con.depth
    z = con.z(horizon)
    rng = random.Random(f"ap:{seed}:{m}")
    L = con.tower.side(con.step(m + 1).n)
    top = 10 * con.step(m + 1).shape_size
    D = con.D
    js = [(0,) * D, (top,) + (0,) * (D - 1), (-top,) + (0,) * (D - 1)]
    while len(js) < samples:
        js.append(tuple(rng.randint(-top, top) for _ in range(D)))
    S = con.shape(m)
    if S.size <= max_sites:
        sites = list(S)
    else:
        sites = [tuple(rng.randrange(a, b) for a, b in zip(S.lo, S.hi)) for _ in range(max_sites)]
    base = {}
    for g in sites:
        v = z(g)
        if v is STAR:
            raise UnresolvedError(f"z{g} unresolved at horizon {horizon}")
        base[g] = v
    mismatch = None
    for j in js:
        c = tuple(L * x for x in j)
        for g in sites:
            v = z(tuple(a + b for a, b in zip(g, c)))
            if v != base[g]:
                mismatch = {"g": g, "c": c, "z_g": base[g], "z_gc": v}
                break
        if mismatch:
            break
    return PeriodicityReport(m, [j[0] for j in js], len(sites), mismatch)


# -- mean dimension upper surrogate -----------------------------------------


@dataclass
class UpperEstimate:
    k: int
    E: Box
    eps: Fraction
    tiles: int
    estimate: Fraction
    threshold: Fraction
    ok: bool

    def to_json(self):
        return {"k": self.k, "E": {"lo": _vec(self.E.lo), "hi": _vec(self.E.hi)}, "eps": _bigint.frac_str(self.eps),
                "tiles": _bigint.dec(self.tiles), "estimate": _bigint.frac_str(self.estimate),
                "threshold": _bigint.frac_str(self.threshold), "ok": self.ok}


def mdim_upper_estimate(con: Construction, k: int, E: Box, eps) -> UpperEstimate:
    """Free scalar coordinates per site of X_k-patterns on E, counted exactly.

    Each level-n_k tile inside E contributes its m_k stars, every uncovered
    site of E counts as free. E must be invariant enough that the tiles cover
    all but an eps share of it.
    """
    eps = Fraction(eps)
    st = con.step(k)
    tiling = con.tower.level(st.n)
    K, delta = prop_big_proportion_constants(tiling, eps)
    if not is_invariant(E, K, delta):
        raise PreconditionError(f"E is not (S_{{n_{k}}}, eps/|S|)-invariant")
    tiles = tiling.tiles_inside(E)
    free = tiles * con.count_stars(k) + (E.size - tiles * st.shape_size)
    estimate = _bigint.ratio(free, E.size)
    threshold = (1 + st.delta) / 2 + _bigint.ratio(1, st.shape_size) + eps
    return UpperEstimate(k, E, eps, tiles, estimate, threshold, estimate < threshold)


def invariant_window(con: Construction, k: int, eps, shift=None, aligned=True) -> Box:
    """A cube passing the precondition of mdim_upper_estimate.

    Side is the smallest multiple of L_{n_k} (aligned) above the sufficient
    bound 2 D |S|^(1 + 1/D) / eps, placed at the level-n_k grid or shifted off it.
    """
    eps = Fraction(eps)
    st = con.step(k)
    L, a, D = con.tower.side(st.n), con.tower.base(st.n), con.D
    need = (2 * D * L * st.shape_size * eps.denominator) // eps.numerator + 1
    side = -(-need // L) * L
    while True:
        lo = tuple(a + s for s in (shift or (0,) * D))
        E = Box(lo, tuple(x + side for x in lo))
        K, delta = prop_big_proportion_constants(con.tower.level(st.n), eps)
        if is_invariant(E, K, delta):
            return E
        side += L


# -- the maps f_k and the distance-expansion lemma ---------------------------


class FMap:
    """f_k(u): u on J_k, the basepoint p on the rest of J, z translated elsewhere.

    `u` is a flat list of net indices: coordinate i of the star with rank r
    sits at u[r * d + i].
    """

    def __init__(self, con: Construction, k: int, u, p=None, cache=None):
        self.con, self.k = con, k
        self.cache = {} if cache is None else cache  # off-J_k values do not depend on u; share across maps
        self.net = con.cfg.net_at(k)
        self.u = u
        self.p = p or apex_tuple(con.d)
        self.z = con.z(con.depth)
        self._H = [con.H(l) for l in range(con.depth)]

    def level_of(self, g):
        """l(g): the first step whose translated shape T_l contains g."""
        for l in range(1, self.con.depth + 1):
            if self.con.in_T(l, g):
                return l
        raise DomainError(f"{g} lies outside T_{self.con.depth}; cannot classify")

    def __call__(self, g):
        g = tuple(g)
        d = self.con.d
        r = self.con.j_rank(self.k, g)
        if r is not None:
            return tuple(self.net.points[self.u[r * d + i]] for i in range(d))
        v = self.cache.get(g)
        if v is None:
            v = self.cache[g] = self._off_Jk(g)
        return v

    def _off_Jk(self, g):
        l = self.level_of(g)
        if self.con.in_J(l, g):
            return self.p
        v = self.z(tuple(a + b for a, b in zip(g, self._H[l - 1])))
        if v is STAR:
            raise UnresolvedError(f"z unresolved at {g}")
        return v


@dataclass
class Lemma36Report:
    k: int
    pairs: int
    radius: int
    full_T: bool
    sites_per_pair: int
    failures: list = field(default_factory=list)
    tightest: Fraction | None = None  # smallest (lower bound - d_linf) over pairs

    @property
    def ok(self):
        return not self.failures

    def to_json(self):
        return {"k": self.k, "pairs": self.pairs, "radius": self.radius, "full_T": self.full_T,
                "sites_per_pair": self.sites_per_pair,
                "tightest_margin": None if self.tightest is None else _bigint.frac_str(self.tightest),
                "failures": self.failures}


def _dist_table(net):
    """Cone distances between net points, scaled to integers by the net's common denominator."""
    exact = [[cone_distance(a, b) for b in net.points] for a in net.points]
    den = 1
    for row in exact:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    return [[int(x * den) for x in row] for row in exact], den


def lemma36_check(con: Construction, k: int, pairs: int = 100, radius: int = 5, seed: int = 0,
                  extra_sites: int = 16, max_stars: int = 2**20) -> Lemma36Report:
    """d_linf(u, v) <= rho_{T_k}(f_k(u), f_k(v)) for random pairs, certified.

    rho_{T_k} is a max over h in T_k; when T_k is small every h is used,
    otherwise the argmax site of d(u_h, v_h) plus `extra_sites` random ones.
    A max over a subset is a lower bound for the full max, so the inequality
    remains certified. Each side is bounded by truncating rho to the ball of
    `radius` and adding the weight tail times the diameter.
    """
    m = con.count_stars(k)
    if m * con.d > max_stars:
        raise UnresolvedError(f"|J_{k}| = {m} too large to sample assignments")
    rng = random.Random(f"l36:{seed}:{k}")
    net = con.cfg.net_at(k)
    table, scale = _dist_table(net)
    cache = {}
    W = weights_for(con.group)
    T = con.T_box(k)
    full = T.size <= 64
    d = con.d
    Hk = con.H(k - 1)
    report = Lemma36Report(k, pairs, radius, full, 0)
    fixed = [("equal", None), ("one-site", None)]
    for i in range(pairs):
        kind = fixed[i][0] if i < len(fixed) else "random"
        u = rng.choices(range(net.size), k=m * d)
        if kind == "equal":
            v = list(u)
        elif kind == "one-site":
            v = list(u)
            s = rng.randrange(m * d)
            # opposite branch tips are at the full diameter 2
            u[s], v[s] = net.index(ConePoint(0, 1)), net.index(ConePoint(1, 1))
        else:
            v = rng.choices(range(net.size), k=m * d)
        site = [table[a][b] for a, b in zip(u, v)]
        top = max(range(m * d), key=site.__getitem__)
        arg, best = top // d, Fraction(site[top], scale)
        fu, fv = FMap(con, k, u, cache=cache), FMap(con, k, v, cache=cache)
        if full:
            hs = list(T)
        else:
            h_star = tuple(x - y for x, y in zip(con.star_position(k, arg), Hk))
            hs = [h_star] + [tuple(rng.randrange(a, b) for a, b in zip(T.lo, T.hi)) for _ in range(extra_sites)]
        lows, ups = [], []
        for h in hs:
            lo, up = rho_truncated(shifted(fu, h), shifted(fv, h), radius, W)
            lows.append(lo)
            ups.append(up)
        report.sites_per_pair = len(hs)
        lower, upper = max(lows), max(ups)
        # the proof's single-site estimate: alpha_e d(u_h, v_h) at h = argmax
        single = W.alpha((0,) * con.D) * best
        margin = lower - best
        report.tightest = margin if report.tightest is None else min(report.tightest, margin)
        if not best <= upper:
            report.failures.append({"pair": i, "kind": kind, "reason": "d_linf > rho upper bound"})
        if not single <= lower:
            report.failures.append({"pair": i, "kind": kind, "reason": "single-site witness above rho lower bound"})
        if kind == "one-site" and best != 2:
            report.failures.append({"pair": i, "kind": kind, "reason": "one-site pair not at distance 2"})
    return report


def f_agree_off_J(con: Construction, k: int, samples: int = 200, seed: int = 0, radius: int | None = None) -> list:
    """Sites g outside J where f_k(u) and f_k(v) differ, for one random pair (should be empty)."""
    rng = random.Random(f"offJ:{seed}:{k}")
    net = con.cfg.net_at(k)
    m = con.count_stars(k) * con.d
    u = [rng.randrange(net.size) for _ in range(m)]
    v = [rng.randrange(net.size) for _ in range(m)]
    fu, fv = FMap(con, k, u), FMap(con, k, v)
    T = con.T_box(k)
    bad = []
    pad = radius if radius is not None else 8
    for _ in range(samples):
        g = tuple(rng.randrange(a - pad, b + pad) for a, b in zip(T.lo, T.hi))
        if con.in_J(k, g):
            continue
        if fu(g) != fv(g):
            bad.append(g)
    return bad
