"""Oriented chain complexes on truncated regions, the functor M(F), and the
half-tree operators phi_g / psi_g.

Chambers are oriented by their source vertex (the one of type x0); the
differential sends a chamber value to +restriction at the source and
-restriction at the target.  Chains are dicts ``face id -> row vector`` in
the transported coordinates of D_[F]; a chamber entry is the value on the
source orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ring_linalg as rl
from .building import (
    PadicMatrix,
    Region,
    RegionError,
    build_region,
    default_t,
    t_shift,
    unipotent_reps,
)
from .coeff import (
    ApartmentSystem,
    CoeffError,
    CoeffSystem,
    _solve_into,
    apartment_system,
    check_category_C,
    diagram_from_hecke_module,
    spread,
)
from .hecke import AlgebraModule, HeckeError, HModule, restrict_module
from .parahoric import invariants, tau_kernel_order
from .ring_linalg import ModuleMap, PresentedModule
from .weyl import is_prime, omega_elt, simple, torus_elt

__all__ = [
    "Region",
    "build_region",
    "ChainComplex",
    "chain_complex",
    "homology",
    "invariants_complex",
    "m_functor",
    "check_rank_one_exactness",
    "check_tau_injective",
    "phi",
    "psi",
    "check_etale_identity",
    "halftree_h0",
]


class ChainError(ValueError):
    pass


@dataclass
class Check:
    name: str
    anchor: str
    ok: bool
    witness: object = None

    def to_json(self) -> dict:
        out = {"name": self.name, "anchor": self.anchor, "pass": bool(self.ok)}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class ChainReport:
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __bool__(self) -> bool:
        return self.ok

    def add(self, name, anchor, ok, witness=None) -> bool:
        self.checks.append(Check(name, anchor, bool(ok), witness))
        return bool(ok)

    def to_json(self) -> dict:
        return {**self.data, "checks": [c.to_json() for c in self.checks]}


def _sum(mods: list[PresentedModule], m: int) -> PresentedModule:
    return rl.direct_sum(mods) if mods else PresentedModule.zero(m)


# ---------------------------------------------------------------------------
# complexes


class ChainComplex:
    """Two-term complex C1 -> C0 with block structure.

    ``c1``/``c0`` list face ids; ``blocks`` maps (chamber, vertex) to the row
    matrix of the signed restriction.
    """

    def __init__(self, m: int, c1: list, c0: list, mods: dict, blocks: dict):
        self.m = m
        self.c1, self.c0 = list(c1), list(c0)
        self.mods = mods
        self.off1, self.off0 = {}, {}
        o = 0
        for F in self.c1:
            self.off1[F] = o
            o += mods[F].n
        o = 0
        for v in self.c0:
            self.off0[v] = o
            o += mods[v].n
        self.P1 = _sum([mods[F] for F in self.c1], m)
        self.P0 = _sum([mods[v] for v in self.c0], m)
        d = np.zeros((self.P1.n, self.P0.n), dtype=np.int64)
        for (D, v), X in blocks.items():
            if D in self.off1 and v in self.off0:
                i, j = self.off1[D], self.off0[v]
                d[i:i + X.shape[0], j:j + X.shape[1]] = X
        self.d0 = ModuleMap(self.P1, self.P0, d % m)

    def slot1(self, F: int) -> slice:
        return slice(self.off1[F], self.off1[F] + self.mods[F].n)

    def slot0(self, v: int) -> slice:
        return slice(self.off0[v], self.off0[v] + self.mods[v].n)

    def vector(self, chain: dict, degree: int) -> np.ndarray:
        """Flatten a chain dict into a row of C_degree."""
        P, slot = (self.P1, self.slot1) if degree == 1 else (self.P0, self.slot0)
        out = np.zeros(P.n, dtype=np.int64)
        for F, x in chain.items():
            out[slot(F)] = (out[slot(F)] + x) % self.m
        return out

    def chain(self, vec: np.ndarray, degree: int) -> dict:
        faces, slot = (self.c1, self.slot1) if degree == 1 else (self.c0, self.slot0)
        out = {}
        for F in faces:
            x = np.asarray(vec[slot(F)]) % self.m
            if x.any():
                out[F] = x
        return out

    def boundary(self, chain: dict) -> dict:
        return self.chain(self.vector(chain, 1) @ self.d0.mat % self.m, 0)

    @property
    def H0(self) -> tuple[PresentedModule, ModuleMap]:
        if not hasattr(self, "_H0"):
            self._H0 = rl.quotient(self.P0, self.d0.mat)
        return self._H0

    @property
    def H1(self) -> tuple[PresentedModule, ModuleMap]:
        if not hasattr(self, "_H1"):
            self._H1 = rl.submodule(self.P1, self.d0.kernel_generators())
        return self._H1

    def is_zero(self) -> bool:
        return self.P1.order == 1 and self.P0.order == 1


def _order_by_distance(region: Region, faces: list) -> list:
    # leaves first keeps the Howell elimination sparse
    return sorted(faces, key=lambda F: (-region.faces[F].dist, F))


def chain_complex(system: CoeffSystem, faces: set | None = None) -> ChainComplex:
    """The oriented chain complex of a spread system on its region.

    ``faces`` restricts the degree-1 term to chambers in the given set.
    """
    reg = system.region
    chambers = [D for D in reg.chambers if faces is None or D in faces]
    c1 = _order_by_distance(reg, chambers)
    c0 = _order_by_distance(reg, reg.vertices)
    mods = {F: system.carrier(F) for F in reg.chambers + reg.vertices}
    blocks = {}
    for D in chambers:
        src, tgt = reg.faces[D].verts
        blocks[(D, src)] = system.restriction(D, src) % system.m
        blocks[(D, tgt)] = (-system.restriction(D, tgt)) % system.m
    return ChainComplex(system.m, c1, c0, mods, blocks)


def homology(K: ChainComplex, i: int) -> PresentedModule:
    if i == 0:
        return K.H0[0]
    if i == 1:
        return K.H1[0]
    raise ChainError("rank-one complexes have homology in degrees 0 and 1 only")


def invariants_complex(A: ApartmentSystem, faces: set | None = None) -> ChainComplex:
    """C_c^ori(A, F^I) built from the transition maps t^D_v."""
    reg = A.region
    chambers = [D for D in reg.chambers if faces is None or D in faces]
    verts = [v for v in reg.vertices if faces is None or v in faces]
    c1 = sorted(chambers, key=lambda D: reg.faces[D].apt)
    c0 = sorted(verts, key=lambda v: reg.faces[v].apt)
    mods = {F: A.value(F) for F in chambers + verts}
    blocks = {}
    for D in chambers:
        src, tgt = reg.faces[D].verts
        blocks[(D, src)] = A.transition(D, src).mat % A.m
        blocks[(D, tgt)] = (-A.transition(D, tgt).mat) % A.m
    return ChainComplex(A.m, c1, c0, mods, blocks)


def iota(K: ChainComplex, A: ApartmentSystem, F: int) -> ModuleMap:
    """iota_F: F^I_F -> H0.  For a chamber, through its source vertex."""
    H0, proj = K.H0
    f = A.region.faces[F]
    if f.dim == 1:
        src = f.verts[0]
        return iota(K, A, src).compose(A.transition(F, src))
    S = A.value(F)
    mat = np.zeros((S.n, K.P0.n), dtype=np.int64)
    mat[:, K.slot0(F)] = np.eye(S.n, dtype=np.int64)
    return ModuleMap(S, H0, mat)


# ---------------------------------------------------------------------------
# the functor M(F)

ANCHOR_ACYCLIC = 'Prop. "acyclic"'
ANCHOR_EQUIV = 'Thm. "equivalence"'


def _inverse_map(f: ModuleMap) -> ModuleMap:
    X = f.cod
    sol = _solve_into(f, np.eye(X.n, dtype=np.int64))
    if sol is None:
        raise ChainError("map is not surjective")
    return ModuleMap(X, f.dom, sol)


def _op_equal(M: PresentedModule, X: np.ndarray, Y: np.ndarray) -> bool:
    return not M.reduce((X - Y) % M.m).any()


@dataclass
class MResult:
    module: HModule | None
    H0: PresentedModule
    H1: PresentedModule
    complex: ChainComplex
    apartment: ApartmentSystem
    report: ChainReport


def m_functor(system: CoeffSystem, N: int | None = None, check: bool = True) -> MResult:
    """H0 of the apartment invariants complex with the H_F^dagger actions
    transported through the iota_F, assembled into an H-module."""
    gd, m = system.gd, system.m
    rep = ChainReport()
    if check:
        cat = check_category_C(system, N)
        rep.add("category_C", 'Lemma "category_C_chamber"', cat.ok, None if cat.ok else str(cat.checks))
    A = apartment_system(system, N)
    reg = A.region
    K = invariants_complex(A)
    H0, _ = K.H0
    H1 = K.H1[0]
    rep.add("H1_vanishes", ANCHOR_ACYCLIC + " (i)", H1.order == 1, None if H1.order == 1 else H1.order)
    iotas = {}
    for name in ("x0", "x1", "C"):
        F = getattr(reg, name)
        iotas[name] = iota(K, A, F)
    ok_iso = iotas["x0"].is_bijective()
    rep.add("iota_x0_bijective", ANCHOR_ACYCLIC + " (i)", ok_iso)
    C = reg.C
    src, tgt = reg.faces[C].verts
    other = iotas["x1"].compose(A.transition(C, tgt))
    rep.add("iota_C_independent", ANCHOR_ACYCLIC + " (iii)", iotas["C"].equals(other))
    if not (ok_iso and all(f.is_bijective() for f in iotas.values())):
        rep.add("iota_F_bijective", ANCHOR_ACYCLIC + " (ii)", False)
        return MResult(None, H0, H1, K, A, rep)
    # transport the H_F^dagger actions
    ops: dict = {}
    for name in ("x0", "x1", "C"):
        F = getattr(reg, name)
        V = system.value(F)
        inv, incl = invariants(V, "I")
        S, iv = A.values[F]
        to_std = _solve_into(incl, iv.mat)  # S -> standard invariants coordinates
        if to_std is None:
            raise ChainError("apartment invariants at the base chamber are not the standard ones")
        std = ModuleMap(S, inv.carrier, to_std)
        io = iotas[name]
        back = _inverse_map(io)  # H0 -> S
        for w, X in zip(inv.algebra.basis, inv.ops):
            # row operator on H0: h -> iota(std^-1(std(iota^-1 h) X^T))
            op_S = std.mat @ X.T @ _inverse_map(std).mat % m
            ops[(name, w)] = back.mat @ op_S @ io.mat % m
    # assemble generators
    ngen = gd.torus_orders
    T = []
    for c in range(len(ngen)):
        t = tuple((1 if i == c else 0) % o for i, o in enumerate(ngen))
        mats = [ops[(nm, torus_elt(gd, t))] for nm in ("x0", "x1", "C") if (nm, torus_elt(gd, t)) in ops]
        agree = all(_op_equal(H0, mats[0], Y) for Y in mats[1:])
        rep.add(f"torus_{c}_consistent", ANCHOR_EQUIV, agree)
        T.append(mats[0].T)
    S0 = ops[("x0", simple(gd, 0))].T
    S1 = ops[("x1", simple(gd, 1))].T
    Om = None
    if gd.kind == "pgl2":
        Om = ops[("C", omega_elt(gd, 1))].T
        # equivariance of iota under omega at the vertices
        for x, y in (("x0", "x1"), ("x1", "x0")):
            Omx = system.diagram.omega[x].mat
            F, G = getattr(reg, x), getattr(reg, y)
            Sx, ix = A.values[F]
            Sy, iy = A.values[G]
            img = _solve_into(iy, ix.mat @ Omx % m)
            ok = img is not None and _op_equal(H0, img @ iotas[y].mat % m, iotas[x].mat @ Om.T % m)
            rep.add(f"omega_equivariance_{x}", ANCHOR_ACYCLIC + " (omega square)", ok)
    try:
        Mout = HModule(gd, H0, [S0, S1], T, Om, validate=True)
        rep.add("H_relations", 'Lemma "Hecke_generation"', True)
    except HeckeError as e:
        rep.add("H_relations", 'Lemma "Hecke_generation"', False, str(e))
        Mout = None
    rep.data = {"region": reg.summary(), "H0": H0.to_json(), "H1": H1.to_json()}
    return MResult(Mout, H0, H1, K, A, rep)


def _simplified(M: HModule) -> tuple[PresentedModule, list[np.ndarray]]:
    """Carrier with redundant generators dropped and the row operators moved along."""
    S, to, back = rl.simplify(M.carrier)
    return S, [back.mat @ X @ to.mat % M.m for X in M.row_ops()]


def modules_isomorphic(P: HModule, M: HModule) -> bool:
    if P.gd != M.gd:
        return False
    # H0 presentations carry one generator per chain slot; shrinking them first
    # keeps the intertwiner system small
    return rl.find_isomorphism(*_simplified(P), *_simplified(M)) is not None


def roundtrip(M: HModule, N: int = 3) -> tuple[bool, MResult]:
    """F(M) spread over the apartment of radius N, then M(F(M)) compared with M."""
    D = diagram_from_hecke_module(M)
    res = m_functor(spread(D, build_region("apartment", M.gd, N)))
    ok = res.module is not None and modules_isomorphic(res.module, M)
    res.report.add("M_F_M_isomorphic", ANCHOR_EQUIV, ok)
    return ok, res


# ---------------------------------------------------------------------------
# rank-one checks


def _require_rank_one(gd, m):
    if gd.kind not in ("sl2", "pgl2"):
        raise ChainError(f"{gd.kind} is not supported by the rank-one checks")
    if not rl.RingZm(m).is_prime_power_of(gd.q):
        raise ChainError("p must be nilpotent in R (m a power of p)")


def check_rank_one_exactness(M: HModule, N: int, boundary: bool = True) -> ChainReport:
    """d0 injective on the tree ball of radius N and M -> H0(BT, F(M)) injective."""
    gd, m = M.gd, M.m
    _require_rank_one(gd, m)
    rep = ChainReport()
    anchor = 'Prop. "semisimple_rank_one"'
    reg = build_region("tree", gd, N)
    D = diagram_from_hecke_module(M)
    S = spread(D, reg)
    K = chain_complex(S)
    inj = K.d0.is_injective()
    wit = None
    if not inj:
        ker = K.d0.kernel_generators()
        wit = {str(F): v.tolist() for F, v in K.chain(ker[0], 1).items()}
    rep.add("d0_injective", anchor, inj, wit)
    if boundary:
        inner = {D_ for D_ in reg.chambers if reg.faces[D_].dist <= N - 1}
        Ki = chain_complex(S, inner)
        rep.add("d0_injective_interior", anchor, Ki.d0.is_injective())
    H0, _ = K.H0
    nat = D.natural["x0"]
    mat = np.zeros((M.n, K.P0.n), dtype=np.int64)
    mat[:, K.slot0(reg.x0)] = nat.mat
    comp = ModuleMap(M.carrier, H0, mat)
    rep.add("M_into_H0_injective", anchor, comp.is_injective())
    rep.data = {"region": reg.summary()}
    return rep


def check_tau_injective(M: HModule) -> ChainReport:
    gd = M.gd
    if not is_prime(gd.q):
        raise ChainError("the flatness criterion needs |k| = p")
    if gd.kind not in ("sl2", "pgl2"):
        raise ChainError(f"{gd.kind} is not supported by the flatness check")
    rep = ChainReport()
    for F in ("x0", "x1", "C"):
        k = tau_kernel_order(restrict_module(M, F, dagger=gd.kind == "pgl2" and F == "C"))
        rep.add(f"tau_injective_{F}", 'Prop. "exceptional_flat"', k == 1, None if k == 1 else k)
    return rep


# ---------------------------------------------------------------------------
# half-tree operators


def phi(system: CoeffSystem, g: PadicMatrix, f: dict) -> dict:
    """phi_g(f)(F) = c_{g, g^-1 F}(f(g^-1 F)); faces leaving the region are dropped."""
    out: dict = {}
    m = system.m
    for G, x in f.items():
        r = system.c_map(g, G)
        if r is None:
            continue
        F, X, sign = r
        out[F] = (out.get(F, 0) + sign * (np.asarray(x) @ X)) % m
    return {F: v for F, v in out.items() if np.any(v)}


def psi(system: CoeffSystem, g: PadicMatrix, f: dict) -> dict:
    """psi_g(f)(F) = c_{g^-1, gF}(f(gF)), zero where g^-1 G leaves the region."""
    return phi(system, g.inv(), f)


def halftree_system(M: HModule | None, gd, N: int, diagram=None) -> CoeffSystem:
    D = diagram if diagram is not None else diagram_from_hecke_module(M)
    return spread(D, build_region("halftree", gd, N))


def shrunken_faces(region: Region, shift: int) -> list[int]:
    """Faces of the half-tree whose vertices all lie at distance >= 2 * shift."""
    out = []
    for f in region.faces:
        vs = f.verts if f.dim == 1 else (f.id,)
        if all(region.vertex_distance(v) >= 2 * shift for v in vs):
            out.append(f.id)
    return out


def basis_chains(system: CoeffSystem, faces) -> list[dict]:
    out = []
    for F in faces:
        n = system.carrier(F).n
        for i in range(n):
            e = np.zeros(n, dtype=np.int64)
            e[i] = 1
            if system.carrier(F).reduce(e).any():
                out.append({F: e})
    return out


def _chains_equal(system: CoeffSystem, a: dict, b: dict) -> bool:
    m = system.m
    for F in set(a) | set(b):
        x = np.asarray(a.get(F, 0)) - np.asarray(b.get(F, 0))
        x = np.broadcast_to(x, (system.carrier(F).n,)) % m
        if system.carrier(F).reduce(x).any():
            return False
    return True


def check_etale_identity(system: CoeffSystem, t: PadicMatrix | None = None) -> ChainReport:
    """sum_u u phi_t psi_t u^-1 = id on basis chains of the shrunken half-tree,
    and psi_t phi_t = id on chains of radius <= N - shift."""
    reg = system.region
    if reg.kind != "halftree":
        raise ChainError("the etale identity is checked on half-trees")
    gd = system.gd
    t = default_t(gd) if t is None else t
    shift = t_shift(gd)
    us = unipotent_reps(gd, t)
    rep = ChainReport()
    anchor = 'Prop. "etale"'
    rep.add("coset_count", anchor, len(us) == gd.q ** shift, len(us))
    shrunk = shrunken_faces(reg, shift)
    ok, wit = True, None
    for f in basis_chains(system, shrunk):
        total: dict = {}
        for u in us:
            y = phi(system, u, phi(system, t, psi(system, t, psi(system, u, f))))
            for F, v in y.items():
                total[F] = (total.get(F, 0) + v) % system.m
        if not _chains_equal(system, total, f):
            ok, wit = False, {str(F): np.asarray(v).tolist() for F, v in f.items()}
            break
    rep.add("etale_identity", anchor, ok, wit)
    inner = [F.id for F in reg.faces if F.dist <= reg.N - shift]
    ok2 = all(_chains_equal(system, psi(system, t, phi(system, t, f)), f) for f in basis_chains(system, inner))
    rep.add("psi_phi_identity", '"psi_g o phi_g = id"', ok2)
    rep.data = {"region": reg.summary(), "shrunken_faces": len(shrunk), "coset_representatives": len(us)}
    return rep


def _ray_faces(region: Region) -> set:
    """Apartment faces inside the half-tree: the ray starting at C."""
    return {f.id for f in region.faces if f.apt is not None and f.apt >= 0}


@dataclass
class HalftreeResult:
    H0: PresentedModule
    phi_t: np.ndarray
    report: ChainReport


def halftree_h0(M: HModule, N: int) -> HalftreeResult:
    """H0 of the half-tree invariants complex and the action of phi_t on H0 of
    the half-tree chain complexes of radius N - shift -> N."""
    gd, m = M.gd, M.m
    _require_rank_one(gd, m)
    rep = ChainReport()
    D = diagram_from_hecke_module(M)
    # invariants on the ray A cap BT+ and on the apartment
    Aapt = apartment_system(spread(D, build_region("apartment", gd, N)))
    ray = _ray_faces(Aapt.region)
    Kray = invariants_complex(Aapt, ray)
    Kapt = invariants_complex(Aapt)
    H0, _ = Kray.H0
    x0 = Aapt.region.x0
    i_ray = iota(Kray, Aapt, x0)
    rep.add("iota_x0_bijective", 'Prop. "chain_complex_D" (ii)', i_ray.is_bijective())
    # inclusion of ray chains into apartment chains
    inc = np.zeros((Kray.P0.n, Kapt.P0.n), dtype=np.int64)
    for v in Kray.c0:
        inc[Kray.slot0(v), Kapt.slot0(v)] = np.eye(Kray.mods[v].n, dtype=np.int64)
    comp = ModuleMap(H0, Kapt.H0[0], inc)
    rep.add("ray_to_apartment_bijective", 'Rmk. "scalar_restriction"', comp.is_bijective())
    res = m_functor(Aapt.system, check=False)
    iso = res.module is not None and modules_isomorphic(res.module, M)
    rep.add("halftree_H0_is_M", 'Rmk. "scalar_restriction"', iso and comp.is_bijective())
    # phi_t between half-tree complexes
    t = default_t(gd)
    shift = t_shift(gd)
    big = halftree_system(None, gd, N, D)
    K = chain_complex(big)
    small = {F.id for F in big.region.faces if F.dist <= N - shift}
    vsmall = [v for v in big.region.vertices if big.region.faces[v].dist <= N - shift]
    csmall = [c for c in big.region.chambers if c in small]
    ok_chain = True
    for c in csmall:
        for i in range(big.carrier(c).n):
            e = np.zeros(big.carrier(c).n, dtype=np.int64)
            e[i] = 1
            lhs = K.vector(phi(big, t, K.boundary({c: e})), 0)
            rhs = K.vector(K.boundary(phi(big, t, {c: e})), 0)
            if K.P0.reduce((lhs - rhs) % m).any():
                ok_chain = False
    rep.add("phi_t_chain_map", '"phi_g o phi_h = phi_gh"', ok_chain)
    # H0 of the small region: vertices at distance <= N - shift, chambers inside
    mods = {f.id: big.carrier(f.id) for f in big.region.faces}
    blocks = {}
    for c in csmall:
        s, tg = big.region.faces[c].verts
        blocks[(c, s)] = big.restriction(c, s)
        blocks[(c, tg)] = (-big.restriction(c, tg)) % m
    Ksm = ChainComplex(m, _order_by_distance(big.region, csmall), _order_by_distance(big.region, vsmall), mods, blocks)
    Hs, _ = Ksm.H0
    Hb, _ = K.H0
    mat = np.zeros((Ksm.P0.n, K.P0.n), dtype=np.int64)
    for v in Ksm.c0:
        for i in range(big.carrier(v).n):
            e = np.zeros(big.carrier(v).n, dtype=np.int64)
            e[i] = 1
            mat[Ksm.off0[v] + i] = K.vector(phi(big, t, {v: e}), 0)
    phimap = ModuleMap.checked(Hs, Hb, mat)
    inj = phimap.is_injective()
    nonzero = M.carrier.order == 1 or Hb.order > 1
    rep.add("phi_t_injective", 'Prop. "non_vanishing"', inj and nonzero)
    rep.data = {"H0": H0.to_json(), "stable_range": [N - shift, N]}
    return HalftreeResult(H0, phimap.mat, rep)
