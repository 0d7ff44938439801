"""mdimshift command line: tower / construct / verify / report.

Exit codes: 0 all checks pass, 1 usage or configuration error, 2 a check failed.
Every JSON output embeds the run configuration and a schema version, and is
written with sorted keys so identical (config, seed) runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

from . import _bigint
from .analysis import (UnresolvedError, almost_periodicity_check, invariant_window, lemma36_check, mdim_upper_estimate,
                       nonembed_certificate, ratio_report)
from .cone import STAR, symbol_to_json
from .construction import (SCHEMA_VERSION, Construction, ConstructionConfig, PlannerError, StepRecord,
                           verify_step_conditions)
from .fixtures import FIXTURES, FixtureError, check_name, corrupt, tamper_steps, tower_overrides
from .group import Box, GroupError, get_group
from .tiling import (TowerConfig, TowerError, build_tower, dumps, syndeticity_witness, tower_to_json,
                     verify_partition_window, verify_prime_congruence)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    group: str = "Z"
    d: int = 1
    growth: int = 4
    anchor: int = 1
    depth: int = 3
    delta: str = "halving"
    weights: str = "geometric"
    net_profile: str = "dyadic"
    samples: int = 200  # coordinates per sampled condition
    centers: int = 100  # almost-periodicity centers
    pairs: int = 100  # lemma pairs at k = 1
    pairs_k2: int = 20  # lemma pairs at k = 2 (each needs |J_2| random net indices)
    eps: str = "1/10"
    tower_levels: int = 6
    window_radius: int = 50
    n_max: int = 10**6
    seed: int = 0
    out: str = "out"

    def validate(self):
        try:
            get_group(self.group)
        except GroupError as e:
            raise ConfigError(str(e)) from None
        if self.weights != "geometric":
            raise ConfigError(f"unknown weight scheme {self.weights!r}")
        for name in ("d", "depth", "samples", "centers", "tower_levels", "window_radius"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        try:
            eps = _bigint.parse_frac(self.eps)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad eps {self.eps!r}") from None
        if eps <= 0:
            raise ConfigError("eps must be positive")
        try:
            self.construction().validate()
            TowerConfig(self.group, self.growth, self.anchor, self.tower_levels + 1).validate()
        except (PlannerError, TowerError) as e:
            raise ConfigError(str(e)) from None
        return self

    def construction(self) -> ConstructionConfig:
        return ConstructionConfig(group=self.group, d=self.d, growth=self.growth, anchor=self.anchor,
                                  depth=self.depth, delta=self.delta, n_max=self.n_max, net_profile=self.net_profile)


def load_config(path=None, **overrides) -> RunConfig:
    doc = {}
    if path:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
    known = {f.name: f.type for f in fields(RunConfig)}
    unknown = sorted(set(doc) - set(known))
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig(**doc)
    except TypeError as e:
        raise ConfigError(str(e)) from None
    for f in fields(RunConfig):
        want = int if f.type == "int" else str
        if not isinstance(getattr(cfg, f.name), want):
            raise ConfigError(f"config key {f.name} must be {want.__name__}")
    return cfg.validate()


class CheckFailed(Exception):
    def __init__(self, tag, detail=""):
        super().__init__(f"{tag}: {detail}" if detail else tag)
        self.tag = tag


def _envelope(cfg: RunConfig, body: dict, fixture=None) -> dict:
    doc = {"schema": SCHEMA_VERSION, "config": asdict(cfg), "fixture": fixture}
    doc.update(body)
    return doc


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")


def _log(msg):
    print(msg, file=sys.stderr)


# -- tower ------------------------------------------------------------------


def cmd_tower(cfg: RunConfig, fixture=None) -> int:
    out = Path(cfg.out)
    clean = build_tower(TowerConfig(cfg.group, cfg.growth, cfg.anchor, cfg.tower_levels + 1))
    tower = build_tower(replace(clean.cfg, base_overrides=tower_overrides(fixture, clean)))
    D = tower.dim
    checks, first = [], None
    far = 10**30
    for n in range(1, cfg.tower_levels + 1):
        tiling = tower.level(n)
        r = cfg.window_radius if D == 1 else min(cfg.window_radius, 20)
        windows = [Box((-r,) * D, (r + 1,) * D), Box((far - r,) * D, (far + r + 1,) * D)]
        part = [verify_partition_window(tiling, W) for W in windows]
        cong = verify_prime_congruence(tower, n, samples=20, seed=cfg.seed)
        nested = tower.shape(n + 1).contains_box(tower.shape(n))
        F, miss = syndeticity_witness(tiling, windows[0])
        cert = tower.certificate(n)
        row = {
            "n": n,
            "partition": all(p.ok for p in part),
            "prime_congruence": cong.ok,
            "nested": nested,
            "syndetic": miss is None,
            "syndeticity_set_size": _bigint.dec(F.size),
            "folner_ratio": _bigint.frac_str(cert.ratio),
            "eta": _bigint.frac_str(cert.eta),
            "witness": None if cong.ok else {k: str(v) for k, v in cong.witness.items()},
        }
        checks.append(row)
        for key in ("partition", "prime_congruence", "nested", "syndetic"):
            if not row[key] and first is None:
                first = (f"tower level {n}: {key}", row["witness"])
    body = tower_to_json(tower, cfg.tower_levels + 1)
    _write(out, "tower.json", dumps(_envelope(cfg, {"tower": body}, fixture)))
    _write(out, "tower-verify.json", dumps(_envelope(cfg, {"levels": checks, "ok": first is None}, fixture)))
    if first:
        _log(f"FAIL {first[0]} witness={first[1]}")
        return 2
    _log(f"tower: {cfg.tower_levels} levels verified")
    return 0


# -- construct --------------------------------------------------------------


def _condition_json(reports):
    out = []
    for rep in reports:
        for r in rep.results:
            out.append({"k": rep.k, "tag": r.tag, "ok": r.ok, "checked": r.checked, "detail": r.detail,
                        "witness": None if r.witness is None else _jsonable(r.witness)})
    return out


def _jsonable(x):
    if x is STAR:
        return "*"
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in sorted(x.items())}
    if isinstance(x, (list, tuple)):
        if x and all(hasattr(p, "to_json") for p in x):
            return symbol_to_json(tuple(x))
        return [_jsonable(v) for v in x]
    if isinstance(x, int) and not isinstance(x, bool):
        return _bigint.dec(x)
    if isinstance(x, Fraction):
        return _bigint.frac_str(x)
    return x


def plan(cfg: RunConfig) -> Construction:
    return Construction.plan(cfg.construction())


def _steps_json(con: Construction):
    docs = []
    for st in con.steps:
        doc = st.to_json()
        doc["slots"] = _bigint.dec(con.d * st.m)
        docs.append(doc)
    return docs


def cmd_construct(cfg: RunConfig, fixture=None) -> int:
    out = Path(cfg.out)
    try:
        con = plan(cfg)
    except PlannerError as e:
        _log(f"error: {e}")
        return 1
    if fixture in ("h-in-R", "delta-increasing"):
        con = Construction(con.cfg, tamper_steps(fixture, con.steps), con.tower)
    _write(out, "steps.json", dumps(_envelope(cfg, {"steps": _steps_json(con)}, fixture)))
    z = con.z(con.depth)
    r = cfg.window_radius
    window = [{"g": list(g), "symbol": symbol_to_json(z(g))} for g in con.group.ball(r)]
    _write(out, "z-window.json", dumps(_envelope(cfg, {"horizon": con.depth, "radius": r, "sites": window}, fixture)))
    reports = [verify_step_conditions(con, k, cfg.samples, cfg.seed) for k in range(1, con.depth + 1)]
    ok = all(rep.ok for rep in reports)
    _write(out, "condition-report.json", dumps(_envelope(cfg, {"conditions": _condition_json(reports), "ok": ok}, fixture)))
    if not ok:
        bad = next(r for rep in reports for r in rep.results if not r.ok)
        _log(f"FAIL {bad.tag} {bad.detail} witness={_jsonable(bad.witness)}")
        return 2
    _log(f"construct: {con.depth} steps, all conditions pass")
    return 0


# -- verify -----------------------------------------------------------------


def load_construction(cfg: RunConfig) -> Construction:
    path = Path(cfg.out) / "steps.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    if doc.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported schema {doc.get('schema')!r}")
    made = RunConfig(**doc["config"]).construction()
    if made != cfg.construction():
        raise ConfigError(f"{path} was produced by a different construction config")
    return Construction(made, [StepRecord.from_json(s) for s in doc["steps"]])


def run_verify(cfg: RunConfig, con: Construction):
    """All analysis checks; returns (artifacts, failures) with failures in check order."""
    eps = _bigint.parse_frac(cfg.eps)
    arts, fails = {}, []

    reports = [verify_step_conditions(con, k, cfg.samples, cfg.seed) for k in range(1, con.depth + 1)]
    arts["condition-report.json"] = {"conditions": _condition_json(reports)}
    fails += [(r.tag, r.detail) for rep in reports for r in rep.results if not r.ok]

    rr = ratio_report(con)
    arts["ratio-report.json"] = rr.to_json()
    arts["ratio-report.csv"] = rr.to_csv()
    fails += [(f.tag, f.detail) for f in rr.failures()]

    cert = nonembed_certificate(con)
    arts["certificate.json"] = cert.to_json()
    fails += [(f.tag, f.detail) for f in cert.failures()]

    ap = []
    for m in range(1, con.depth - 1):
        try:
            rep = almost_periodicity_check(con, m, cfg.centers, cfg.seed)
        except UnresolvedError as e:
            fails.append((f"Part2(m={m})", str(e)))
            continue
        ap.append(rep.to_json())
        if not rep.ok:
            fails.append((f"Part2(m={m})", f"z differs at g={rep.mismatch['g']} c={rep.mismatch['c']}"))
    arts["almost-periodicity.json"] = {"checks": ap}

    up = []
    for k in range(1, min(3, con.depth) + 1):
        for shift in (None, (7,) * con.D):
            est = mdim_upper_estimate(con, k, invariant_window(con, k, eps, shift), eps)
            up.append(est.to_json())
            if not est.ok:
                fails.append((f"Part3(k={k})", "upper estimate not below threshold"))
    arts["mdim-upper.json"] = {"estimates": up}

    lem = []
    for k, pairs in ((1, cfg.pairs), (2, cfg.pairs_k2)):
        if k > con.depth - 1 or pairs < 1:
            continue
        try:
            rep = lemma36_check(con, k, pairs, seed=cfg.seed)
        except UnresolvedError as e:
            lem.append({"k": k, "skipped": str(e)})
            continue
        lem.append(rep.to_json())
        if not rep.ok:
            fails.append((f"Lemma(k={k})", rep.failures[0]["reason"]))
    arts["lemma36.json"] = {"checks": lem}
    return arts, fails


def cmd_verify(cfg: RunConfig, fixture=None) -> int:
    out = Path(cfg.out)
    try:
        con = load_construction(cfg)
    except ConfigError as e:
        _log(f"error: {e}")
        return 1
    if fixture in ("h-in-R", "delta-increasing"):
        con = Construction(con.cfg, tamper_steps(fixture, con.steps), con.tower)
    con = corrupt(fixture, con)
    arts, fails = run_verify(cfg, con)
    for name, body in arts.items():
        if name.endswith(".csv"):
            _write(out, name, body)
        else:
            _write(out, name, dumps(_envelope(cfg, body, fixture)))
    summary = {"ok": not fails, "failures": [{"tag": t, "detail": d} for t, d in fails]}
    _write(out, "verify-summary.json", dumps(_envelope(cfg, summary, fixture)))
    if fails:
        _log(f"FAIL {fails[0][0]} {fails[0][1]}")
        return 2
    _log("verify: all checks pass")
    return 0


# -- report -----------------------------------------------------------------


def cmd_report(cfg: RunConfig, fixture=None) -> int:
    out = Path(cfg.out)
    try:
        ratio = json.loads((out / "ratio-report.json").read_text(encoding="utf-8"))
        cert = json.loads((out / "certificate.json").read_text(encoding="utf-8"))
        summary = json.loads((out / "verify-summary.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        _log(f"error: run `verify` first ({e})")
        return 1
    lines = ["k  delta      |J_k|/|T_k|       in window"]
    for row in ratio["rows"]:
        r = _bigint.parse_frac(row["ratio"])
        lines.append(f"{row['k']:<2} {row['delta']:<10} {float(r):<17.12f} {row['ok']}")
    passed = sum(1 for e in cert["entries"] if e["pass"])
    lines.append(f"non-embedding certificate: {passed}/{len(cert['entries'])} pairs (N, k) pass")
    lines.append("failures: " + (", ".join(f["tag"] for f in summary["failures"]) or "none"))
    print("\n".join(lines))
    return 0 if summary["ok"] else 2


COMMANDS = {"tower": cmd_tower, "construct": cmd_construct, "verify": cmd_verify, "report": cmd_report}


def build_parser():
    p = argparse.ArgumentParser(prog="mdimshift", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with RunConfig fields")
        s.add_argument("--depth", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--out")
        s.add_argument("--group")
        s.add_argument("--d", type=int)
        s.add_argument("--fixture", help=f"one of {sorted(FIXTURES)}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        check_name(args.fixture)
        cfg = load_config(args.config, depth=args.depth, seed=args.seed, out=args.out, group=args.group, d=args.d)
    except (ConfigError, FixtureError) as e:
        _log(f"error: {e}")
        return 1
    return COMMANDS[args.command](cfg, args.fixture)


if __name__ == "__main__":
    sys.exit(main())
