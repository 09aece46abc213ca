"""Command-line front end.

Every command prints one JSON document (``"schema": 1``).  Randomness comes
from ``numpy.random.default_rng(seed)`` (PCG64); the seed and the case index
determine every sampled module, so reports are reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import chains as ch
from . import coeff as cf
from . import ring_linalg as rl
from .building import RegionError, build_region
from .hecke import HeckeError, HModule, parahoric_algebra, tau
from .parahoric import cabanes_check, frobenius_matrix, t_F
from .samplers import random_hf_module, random_hmodule
from .weyl import FACES, GroupData, WeylError, identity, normalize_kind, omega_elt, random_element

SCHEMA = 1
SUITES = ("braid", "parahoric", "cabanes", "frobenius", "roundtrip", "acyclic", "rank1", "flat", "etale")
DAGGER_SUITES = {"roundtrip", "acyclic", "rank1", "flat", "etale"}


class ConfigError(ValueError):
    pass


@dataclass
class SuiteConfig:
    suite: str
    kind: str
    q: int
    m: int
    radius: int = 3
    seed: int = 0
    cases: int = 10

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ConfigError(f"unknown suite {self.suite!r}")
        try:
            self.kind = normalize_kind(self.kind)
            GroupData(self.kind, self.q)
        except (WeylError, ValueError) as e:
            raise ConfigError(str(e)) from e
        if self.m < 2:
            raise ConfigError("ring modulus must be at least 2")
        if self.radius < 1:
            raise ConfigError("radius must be at least 1")
        if self.cases < 0:
            raise ConfigError("case count must be non-negative")
        if self.kind == "gl2" and self.suite in DAGGER_SUITES | {"all"}:
            raise ConfigError(f"suite {self.suite!r} needs the dagger algebras, which GL2 does not have here")
        if self.suite in ("rank1", "etale") and not rl.RingZm(self.m).is_prime_power_of(self.q):
            raise ConfigError(f"suite {self.suite!r} needs m to be a power of p")

    @property
    def gd(self) -> GroupData:
        return GroupData(self.kind, self.q)

    def to_json(self) -> dict:
        return {"suite": self.suite, "group": self.kind, "q": self.q, "ring": f"zmod:{self.m}", "radius": self.radius, "seed": self.seed, "cases": self.cases}


def _check(name, anchor, ok, case=None, witness=None) -> dict:
    out = {"name": name, "anchor": anchor, "pass": bool(ok)}
    if case is not None:
        out["case"] = case
    if witness is not None:
        out["witness"] = witness
    return out


def _rng(cfg: SuiteConfig, suite: str, case: int):
    # one independent stream per (suite, case), so sharding does not change results
    return np.random.default_rng([cfg.seed, SUITES.index(suite), case])


def _from_report(rep, case) -> list[dict]:
    return [_check(c.name, c.anchor, c.ok, case, c.witness) for c in rep.checks]


# ---------------------------------------------------------------------------
# suites


def suite_braid(cfg: SuiteConfig) -> list[dict]:
    gd, m = cfg.gd, cfg.m
    out = []
    for case in range(cfg.cases):
        rng = _rng(cfg, "braid", case)
        a, b, c = (tau(gd, m, random_element(gd, rng)) for _ in range(3))
        lhs, rhs = (a * b) * c, a * (b * c)
        ok = (lhs - rhs).is_zero()
        out.append(_check("associativity", "Eq. 7/8", ok, case, None if ok else [repr(a), repr(b), repr(c)]))
    return out


def expected_rank(gd: GroupData, F: str, dagger: bool) -> int:
    r = gd.torus_size * (1 if F == "C" else 2)
    if dagger and F == "C" and gd.kind == "pgl2":
        r *= 2
    return r


def suite_parahoric(cfg: SuiteConfig) -> list[dict]:
    gd, m = cfg.gd, cfg.m
    out = []
    for F in FACES:
        for dagger in ((False, True) if F == "C" and gd.kind == "pgl2" else (False,)):
            A = parahoric_algebra(gd, m, F, dagger)
            exp = expected_rank(gd, F, dagger)
            out.append(_check(f"rank_H_{F}{'_dagger' if dagger else ''}", "Eq. 9", A.rank == exp, None, None if A.rank == exp else [A.rank, exp]))
    if gd.kind == "pgl2":
        w = tau(gd, m, omega_elt(gd, 1))
        ok = ((w * w) - tau(gd, m, identity(gd))).is_zero()
        out.append(_check("tau_omega_squared", "Eq. 9", ok))
    return out


def suite_frobenius(cfg: SuiteConfig) -> list[dict]:
    gd, m = cfg.gd, cfg.m
    out = []
    for F in FACES:
        _, inv = frobenius_matrix(gd, m, F)
        out.append(_check(f"frobenius_invertible_{F}", 'Prop. "selfinjective"', inv))
    return out


def suite_cabanes(cfg: SuiteConfig) -> list[dict]:
    gd, m = cfg.gd, cfg.m
    out = []
    for F in FACES:
        A = parahoric_algebra(gd, m, F)
        for case in range(cfg.cases):
            rng = _rng(cfg, "cabanes", case * 3 + FACES.index(F))
            M = random_hf_module(gd, m, A, rng)
            rep = cabanes_check(M, t_F(M))
            wit = None if rep.ok else {k: bool(v) for k, v in rep.checks.items()}
            out.append(_check(f"cabanes_{F}", 'Thm. "Cabanes"', rep.ok, case, wit))
    return out


def _random_modules(cfg: SuiteConfig, suite: str):
    for case in range(cfg.cases):
        yield case, random_hmodule(cfg.gd, cfg.m, _rng(cfg, suite, case))


def suite_roundtrip(cfg: SuiteConfig) -> list[dict]:
    out = []
    for case, M in _random_modules(cfg, "roundtrip"):
        ok, res = ch.roundtrip(M, cfg.radius)
        out += _from_report(res.report, case)
        ok2, res2 = ch.roundtrip(M, cfg.radius + 1)
        same = res.module is not None and res2.module is not None and ch.modules_isomorphic(res.module, res2.module)
        out.append(_check("radius_independent", 'Thm. "equivalence"', same, case))
    return out


def suite_acyclic(cfg: SuiteConfig) -> list[dict]:
    out = []
    for case, M in _random_modules(cfg, "acyclic"):
        S = cf.spread(cf.diagram_from_hecke_module(M), build_region("apartment", M.gd, cfg.radius))
        res = ch.m_functor(S)
        out += [c for c in _from_report(res.report, case) if c["anchor"].startswith('Prop. "acyclic"')]
        A = res.apartment
        taus = cf.tau_gamma_checks(A)
        out.append(_check("tau_gamma_square", 'Lemma "acyclic_locally_constant"', all(t.square_commutes for t in taus), case))
        if np.gcd(cfg.m, cfg.q) == 1:
            allbij = all(t.is_bijective() for t in A.t.values())
            units = all(t.unit and t.bijective for t in taus)
            out.append(_check("p_invertible_transitions", 'Lemma "acyclic_locally_constant"', allbij and units, case))
    return out


def suite_rank1(cfg: SuiteConfig) -> list[dict]:
    out = []
    for case, M in _random_modules(cfg, "rank1"):
        out += _from_report(ch.check_rank_one_exactness(M, cfg.radius), case)
    return out


def suite_flat(cfg: SuiteConfig) -> list[dict]:
    out = []
    for case, M in _random_modules(cfg, "flat"):
        out += _from_report(ch.check_tau_injective(M), case)
    return out


def suite_etale(cfg: SuiteConfig) -> list[dict]:
    out = []
    for case, M in _random_modules(cfg, "etale"):
        out += _from_report(ch.check_etale_identity(ch.halftree_system(M, M.gd, cfg.radius)), case)
        out += _from_report(ch.halftree_h0(M, cfg.radius).report, case)
    return out


SUITE_FUNCS = {
    "braid": suite_braid,
    "parahoric": suite_parahoric,
    "cabanes": suite_cabanes,
    "frobenius": suite_frobenius,
    "roundtrip": suite_roundtrip,
    "acyclic": suite_acyclic,
    "rank1": suite_rank1,
    "flat": suite_flat,
    "etale": suite_etale,
}


def run_suite(cfg: SuiteConfig) -> dict:
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    if cfg.suite == "all" and not rl.RingZm(cfg.m).is_prime_power_of(cfg.q):
        names = tuple(s for s in names if s not in ("rank1", "etale"))
    checks = []
    for s in names:
        for c in SUITE_FUNCS[s](cfg):
            checks.append({"suite": s, **c})
    return {"config": cfg.to_json(), "ok": all(c["pass"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# compute commands


def _load_module(path: str) -> HModule:
    with open(path) as fh:
        data = json.load(fh)
    return HModule.from_json(data.get("module", data))


def cmd_algebra(args) -> dict:
    gd = GroupData(normalize_kind(args.group), args.q)
    m = rl.RingZm.parse(args.ring).m
    A = parahoric_algebra(gd, m, args.face, args.dagger)
    return {"algebra": A.to_json(), "rank": A.rank, "face": args.face, "dagger": bool(args.dagger)}


def cmd_fm(args) -> dict:
    M = _load_module(args.module)
    D = cf.diagram_from_hecke_module(M)
    out = {"module": M.to_json(), "diagram": D.to_json(), "zero": D.is_zero()}
    if args.radius:
        S = cf.spread(D, build_region(args.region, M.gd, args.radius))
        out["system"] = S.to_json()
    return out


def cmd_homology(args) -> dict:
    M = _load_module(args.module)
    D = cf.diagram_from_hecke_module(M)
    if args.region == "invariants":
        S = cf.spread(D, build_region("apartment", M.gd, args.radius))
        res = ch.m_functor(S)
        ok = res.module is not None and ch.modules_isomorphic(res.module, M)
        res.report.add("M_F_M_isomorphic", 'Thm. "equivalence"', ok)
        out = res.report.to_json()
        if res.module is not None:
            out["module"] = res.module.to_json()
        return out
    S = cf.spread(D, build_region(args.region, M.gd, args.radius))
    K = ch.chain_complex(S)
    return {"region": S.region.summary(), "H0": ch.homology(K, 0).to_json(), "H1": ch.homology(K, 1).to_json(), "checks": []}


def cmd_halftree(args) -> dict:
    M = _load_module(args.module)
    res = ch.halftree_h0(M, args.radius)
    out = res.report.to_json()
    out["phi_t"] = rl.matrix_to_json(res.phi_t, M.m)
    return out


def cmd_verify(args) -> dict:
    cfg = SuiteConfig(args.suite, args.group, args.q, rl.RingZm.parse(args.ring).m, args.radius, args.seed, args.cases)
    return run_suite(cfg)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hkcoeff", description="Hecke modules and coefficient systems on rank-one trees")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--timestamp", action="store_true", help="add a generation timestamp to the output")
    sub = p.add_subparsers(dest="cmd", required=True)

    a = sub.add_parser("algebra", help="structure constants of a parahoric Hecke algebra")
    a.add_argument("--group", required=True)
    a.add_argument("--q", type=int, required=True)
    a.add_argument("--ring", required=True)
    a.add_argument("--face", choices=FACES, required=True)
    a.add_argument("--dagger", action="store_true")
    a.set_defaults(func=cmd_algebra)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True)
    v.add_argument("--group", required=True)
    v.add_argument("--q", type=int, required=True)
    v.add_argument("--ring", required=True)
    v.add_argument("--radius", type=int, default=3)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--cases", type=int, default=10)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fm", help="diagram (and optionally spread system) of F(M)")
    f.add_argument("--module", required=True)
    f.add_argument("--radius", type=int, default=0)
    f.add_argument("--region", choices=("apartment", "tree", "halftree"), default="apartment")
    f.set_defaults(func=cmd_fm)

    h = sub.add_parser("homology", help="homology of the chain complex of F(M)")
    h.add_argument("--module", required=True)
    h.add_argument("--radius", type=int, default=3)
    h.add_argument("--region", choices=("apartment", "tree", "halftree", "invariants"), default="invariants")
    h.set_defaults(func=cmd_homology)

    t = sub.add_parser("halftree", help="half-tree H0 of the invariants and phi_t")
    t.add_argument("--module", required=True)
    t.add_argument("--radius", type=int, default=3)
    t.set_defaults(func=cmd_halftree)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        body = args.func(args)
    except (ConfigError, WeylError, HeckeError, RegionError, cf.CoeffError, ch.ChainError, rl.LinalgError, ValueError, OSError) as e:
        err = {"schema": SCHEMA, "command": args.cmd, "error": f"{type(e).__name__}: {e}"}
        print(json.dumps(err, sort_keys=True))
        return 2
    doc = {"schema": SCHEMA, "command": args.cmd, **body}
    if args.timestamp:
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    text = json.dumps(doc, sort_keys=True, default=_json_default)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.cmd == "verify":
        return 0 if doc["ok"] else 1
    checks = doc.get("checks", [])
    return 0 if all(c.get("pass", True) for c in checks) else 1


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.bool_,)):
        return bool(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


if __name__ == "__main__":
    sys.exit(main())
