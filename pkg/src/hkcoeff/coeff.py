"""Diagrams on the closed base chamber, spread coefficient systems, and the
apartment system of invariants.

A diagram stores one finite representation per face of the closed chamber,
the restriction maps r^C_x and, for PGL2, the maps c_omega between the two
vertex values.  Spreading a diagram over a region assigns to each face F the
value D_[F]; restriction maps and group actions are twisted by the images of
gamma_F' gamma_F^-1 in the finite quotients.
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
    finite_image,
    iwahori_coset_reps,
    iwahori_generators,
    n_s0,
    n_s1,
)
from .hecke import AlgebraModule, HModule, restrict_module
from .parahoric import (
    FiniteRep,
    Report,
    check_condition_H,
    finite_quotient,
    invariants,
    t_F,
    trivial_rep,
)
from .ring_linalg import LinalgError, ModuleMap, PresentedModule
from .weyl import GroupData, simple

FACES = ("x0", "x1", "C")
J = (0, 1, 1, 0)


class CoeffError(ValueError):
    pass


def _conj_J(g: tuple, p: int) -> tuple:
    a, b, c, d = g
    return (d, c, b, a)


def _solve_into(incl: ModuleMap, rows: np.ndarray) -> np.ndarray | None:
    """Coordinates in incl.dom of rows given in incl.cod coordinates."""
    cod = incl.cod
    A = np.vstack([incl.mat, cod.rel]) if cod.rel.shape[0] else incl.mat
    sol = rl.solve_many(A, rows, cod.m)
    return None if sol is None else sol[:, : incl.dom.n]


def map_from_generators(dom: PresentedModule, cod: PresentedModule, src, dst) -> ModuleMap:
    """The R-linear map sending each row of ``src`` to the matching row of ``dst``.

    The rows of src must generate dom; consistency on every row is verified.
    """
    m = dom.m
    src = rl.as_rows(src, dom.n) % m
    dst = rl.as_rows(dst, cod.n) % m
    A = np.vstack([src, dom.rel]) if dom.rel.shape[0] else src
    X = rl.solve_many(A, np.eye(dom.n, dtype=np.int64), m)
    if X is None:
        raise CoeffError("generating rows do not span the domain")
    f = ModuleMap.checked(dom, cod, X[:, : src.shape[0]] @ dst % m)
    if cod.reduce((src @ f.mat - dst) % m).any():
        raise CoeffError("prescribed values are not compatible with a linear map")
    return f


# ---------------------------------------------------------------------------
# diagrams


@dataclass
class Diagram:
    """Finite data of an equivariant coefficient system on the closed chamber C.

    ``reps[F]`` is a FiniteRep of the quotient at F (the dagger quotient at C
    for PGL2), ``res[x]`` the restriction D_C -> D_x and ``omega[x]`` the map
    D_x -> D_{omega x} induced by omega (PGL2 only).
    """

    gd: GroupData
    m: int
    reps: dict
    res: dict
    omega: dict = field(default_factory=dict)
    natural: dict = field(default_factory=dict)
    module: HModule | None = None

    def validate(self) -> "Diagram":
        bad = self.compatibility_witness()
        if bad:
            raise CoeffError(f"diagram compatibility fails: {bad}")
        return self

    def compatibility_witness(self) -> str | None:
        gd, m = self.gd, self.m
        DC = self.reps["C"]
        GC = DC.G
        for x in ("x0", "x1"):
            Dx, r = self.reps[x], self.res[x]
            Gx = Dx.G
            # P_C cap P_x acts on D_C through its torus part
            for b in Gx.subgroup("B"):
                a, _, _, d = Gx.elements[b]
                c = GC.idx((a, 0, 0, d))
                lhs = DC.row_op(c) @ r.mat % m
                rhs = r.mat @ Dx.row_op(b) % m
                if Dx.carrier.reduce((lhs - rhs) % m).any():
                    return f"r^C_{x} is not equivariant at {Gx.elements[b]}"
        if self.omega:
            for x, y in (("x0", "x1"), ("x1", "x0")):
                Om = self.omega[x]
                Dx, Dy = self.reps[x], self.reps[y]
                for g in Dx.G.generators:
                    h = Dy.G.idx(_conj_J(Dx.G.elements[g], gd.q))
                    lhs = Dx.row_op(g) @ Om.mat % m
                    rhs = Om.mat @ Dy.row_op(h) % m
                    if Dy.carrier.reduce((lhs - rhs) % m).any():
                        return f"omega map at {x} is not compatible with conjugation"
                lhs = DC.row_op(GC.idx(J)) @ self.res[y].mat % m
                rhs = self.res[x].mat @ Om.mat % m
                if Dy.carrier.reduce((lhs - rhs) % m).any():
                    return f"omega map at {x} does not commute with restriction"
            sq = self.omega["x0"].mat @ self.omega["x1"].mat % m
            if self.reps["x0"].carrier.reduce((sq - np.eye(sq.shape[0], dtype=np.int64)) % m).any():
                return "omega^2 does not act trivially"
        return None

    def is_zero(self) -> bool:
        return all(self.reps[F].carrier.order == 1 for F in FACES)

    def to_json(self) -> dict:
        out = {
            "group": self.gd.to_json(),
            "ring": f"zmod:{self.m}",
            "faces": {F: self.reps[F].to_json() for F in FACES},
            "restriction": {x: rl.matrix_to_json(self.res[x].mat, self.m) for x in ("x0", "x1")},
        }
        if self.omega:
            out["omega"] = {x: rl.matrix_to_json(self.omega[x].mat, self.m) for x in ("x0", "x1")}
        return out


def _dagger(gd: GroupData) -> bool:
    return gd.kind == "pgl2"


def _check_kind(gd: GroupData):
    if gd.kind == "gl2":
        raise CoeffError("GL2 diagrams are not constructed here (Omega_F is infinite)")


def diagram_from_hecke_module(M: HModule) -> Diagram:
    """The diagram of F(M): D_F = t_F(M restricted to H_F^dagger)."""
    gd, m = M.gd, M.m
    _check_kind(gd)
    reps, nat = {}, {}
    for F in FACES:
        res = t_F(restrict_module(M, F, dagger=_dagger(gd) and F == "C"))
        reps[F], nat[F] = res.rep, res.natural
    # D_C = M: invert the natural map and push to the vertices
    if not nat["C"].is_bijective():
        raise CoeffError("natural map M -> D_C is not bijective")
    DC = reps["C"].carrier
    inv = _solve_into(nat["C"], np.eye(DC.n, dtype=np.int64))
    if inv is None:
        raise CoeffError("natural map M -> D_C is not surjective")
    restr = {}
    for x in ("x0", "x1"):
        try:
            restr[x] = ModuleMap.checked(DC, reps[x].carrier, inv @ nat[x].mat % m)
        except LinalgError as e:
            raise CoeffError(f"restriction to {x} is ill defined: {e}") from e
    omega = {}
    if gd.kind == "pgl2":
        Om = M.Om.T  # row operator of tau_omega
        eye = np.eye(M.n, dtype=np.int64)
        for x, y in (("x0", "x1"), ("x1", "x0")):
            Dx, Dy = reps[x], reps[y]
            src, dst = [], []
            for g in range(Dx.G.order):
                h = Dy.G.idx(_conj_J(Dx.G.elements[g], gd.q))
                src.append(eye @ nat[x].mat @ Dx.row_op(g) % m)
                dst.append(Om @ nat[y].mat @ Dy.row_op(h) % m)
            omega[x] = map_from_generators(Dx.carrier, Dy.carrier, np.vstack(src), np.vstack(dst))
    D = Diagram(gd, m, reps, restr, omega, nat, M)
    return D.validate()


def constant_diagram(gd: GroupData, m: int) -> Diagram:
    """The constant system with value R and trivial actions."""
    _check_kind(gd)
    reps = {F: trivial_rep(finite_quotient(gd, F, _dagger(gd) and F == "C"), m) for F in FACES}
    one = PresentedModule.free(m, 1)
    res = {x: rl.identity_map(one) for x in ("x0", "x1")}
    omega = {x: rl.identity_map(one) for x in ("x0", "x1")} if gd.kind == "pgl2" else {}
    return Diagram(gd, m, reps, res, omega).validate()


def zero_diagram(gd: GroupData, m: int) -> Diagram:
    _check_kind(gd)
    z = PresentedModule.zero(m)
    reps = {}
    for F in FACES:
        G = finite_quotient(gd, F, _dagger(gd) and F == "C")
        reps[F] = FiniteRep(G, z, np.zeros((G.order, 0, 0), dtype=np.int64))
    res = {x: ModuleMap(z, z, np.zeros((0, 0), dtype=np.int64)) for x in ("x0", "x1")}
    omega = dict(res) if gd.kind == "pgl2" else {}
    return Diagram(gd, m, reps, res, omega)


# ---------------------------------------------------------------------------
# spread systems


class CoeffSystem:
    """A diagram spread over a region through the face transports gamma_F."""

    def __init__(self, diagram: Diagram, region: Region, check: bool = True):
        if diagram.gd != region.gd:
            raise CoeffError("diagram and region belong to different groups")
        self.diagram = diagram
        self.region = region
        self.gd = diagram.gd
        self.m = diagram.m
        self._cache: dict = {}
        if check:
            self.check_transports()

    def value(self, F: int) -> FiniteRep:
        return self.diagram.reps[self.region.faces[F].label]

    def carrier(self, F: int) -> PresentedModule:
        return self.value(F).carrier

    def act(self, label: str, h: PadicMatrix) -> np.ndarray:
        """Row operator of c_h on D_label for h stabilizing [F] (or swapping vertex types)."""
        elem, cross = finite_image(self.gd, label, h)
        V = self.diagram.reps[label]
        X = V.row_op(V.G.idx(elem))
        if cross:
            X = X @ self.diagram.omega[label].mat % self.m
        return X

    def restriction(self, D: int, v: int) -> np.ndarray:
        """Row matrix of r^D_v in transported coordinates."""
        key = ("r", D, v)
        if key not in self._cache:
            fD, fv = self.region.faces[D], self.region.faces[v]
            if v not in fD.verts:
                raise CoeffError("vertex is not a face of the chamber")
            delta = fv.gamma @ fD.gamma.inv()
            X = self.diagram.res[fv.label].mat @ self.act(fv.label, delta) % self.m
            self._cache[key] = X
        return self._cache[key]

    def check_transports(self):
        reg = self.region
        for D in reg.chambers:
            for v in reg.faces[D].verts:
                fD, fv = reg.faces[D], reg.faces[v]
                delta = fv.gamma @ fD.gamma.inv()
                try:
                    _, cross = finite_image(self.gd, fv.label, delta)
                except RegionError as e:
                    raise CoeffError(f"twist of ({D}, {v}) is not in the stabilizer: {e}") from e
                if cross:
                    raise CoeffError("transports must be type preserving")

    def c_map(self, g: PadicMatrix, F: int):
        """(gF, row matrix of c_{g,F} in transported coordinates, orientation sign).

        Returns None when gF lies outside the region.
        """
        G = self.region.image(g, F)
        if G is None:
            return None
        fF, fG = self.region.faces[F], self.region.faces[G]
        h = fG.gamma @ g @ fF.gamma.inv()
        X = self.act(fF.label, h)
        sign = 1
        if fF.dim == 1:
            src = self.region.image(g, fF.verts[0])
            sign = 1 if src == fG.verts[0] else -1
        return G, X, sign

    def restrict_to_chamber(self) -> Diagram:
        """res(spread(D)): the stored data on the closed chamber."""
        reg = self.region
        res = {x: ModuleMap(self.carrier(reg.C), self.carrier(getattr(reg, x)), self.restriction(reg.C, getattr(reg, x))) for x in ("x0", "x1")}
        return Diagram(self.gd, self.m, dict(self.diagram.reps), res, dict(self.diagram.omega))

    def to_json(self) -> dict:
        reg = self.region
        faces = []
        for f in reg.faces:
            entry = {"id": f.id, "dim": f.dim, "type": f.label, "transport": f.gamma.to_json(), "apartment": f.apt}
            if f.dim == 1:
                entry["restriction"] = {str(v): rl.matrix_to_json(self.restriction(f.id, v), self.m) for v in f.verts}
            faces.append(entry)
        return {"region": reg.summary(), "diagram": self.diagram.to_json(), "faces": faces}


def spread(diagram: Diagram, region: Region) -> CoeffSystem:
    return CoeffSystem(diagram, region)


def fm_system(M: HModule, region: Region) -> CoeffSystem:
    return spread(diagram_from_hecke_module(M), region)


# ---------------------------------------------------------------------------
# the apartment system of invariants


def _closure_subgroup(G, elems) -> list[int]:
    return G.closure(sorted(set(elems)))


def _fixed_submodule(V: FiniteRep, subgroup: list[int]):
    if sorted(subgroup) == sorted(V.G.subgroup("I")):
        G = V.fixed_generators("I")
    else:
        H = [h for h in subgroup if h != V.G.identity]
        M = V.carrier
        if not H or M.n == 0:
            G = np.eye(M.n, dtype=np.int64)
        else:
            eye = np.eye(M.n, dtype=np.int64)
            A = np.hstack([(V.mats[h].T - eye) % V.m for h in H])
            big = rl.direct_sum([M] * len(H))
            G = ModuleMap(M, big, A).kernel_generators()
        G = M.reduce(G) if G.size else G.reshape(0, M.n)
    return rl.submodule(V.carrier, G)


class ApartmentSystem:
    """F^I on the apartment: values F_F^{I cap P_F} and coset-sum transitions."""

    def __init__(self, system: CoeffSystem):
        reg = system.region
        if reg.kind != "apartment":
            raise CoeffError("apartment systems are computed on apartment regions")
        self.system = system
        self.region = reg
        self.gd, self.m = system.gd, system.m
        self.values: dict = {}
        self.standard: dict = {}
        for f in reg.faces:
            V = system.value(f.id)
            elems = []
            for g in iwahori_generators(self.gd, f.dim, f.apt):
                elem, cross = finite_image(self.gd, f.label, f.gamma @ g @ f.gamma.inv())
                elems.append(V.G.idx(elem))
            sub = _closure_subgroup(V.G, elems)
            self.standard[f.id] = sorted(sub) == sorted(V.G.subgroup("I"))
            self.values[f.id] = _fixed_submodule(V, sub)
        self.t: dict = {}
        self.t_full: dict = {}
        for D in reg.chambers:
            fD = reg.faces[D]
            for v in fD.verts:
                fv = reg.faces[v]
                reps = iwahori_coset_reps(self.gd, (0, fv.apt), (1, fD.apt))
                S = np.zeros((system.carrier(v).n,) * 2, dtype=np.int64)
                for g in reps:
                    S = (S + system.act(fv.label, fv.gamma @ g @ fv.gamma.inv())) % self.m
                full = system.restriction(D, v) @ S % self.m
                self.t_full[(D, v)] = (full, len(reps))
                SD, iD = self.values[D]
                Sv, iv = self.values[v]
                coords = _solve_into(iv, iD.mat @ full % self.m)
                if coords is None:
                    raise CoeffError(f"transition {D}->{v} leaves the invariants")
                self.t[(D, v)] = ModuleMap.checked(SD, Sv, coords)

    def value(self, F: int) -> PresentedModule:
        return self.values[F][0]

    def closest(self, F: int) -> int:
        return self.region.faces[F].closest

    def transition(self, D: int, v: int) -> ModuleMap:
        return self.t[(D, v)]

    def locally_constant_pairs(self) -> list[tuple[int, int]]:
        """Incident pairs (D, v) with C(v) = C(D) = D."""
        return [(D, v) for (D, v) in self.t if self.closest(v) == D]

    def check_plain_restriction(self) -> bool:
        """For C(v) = D the transition is the restriction r^D_v on invariants."""
        for D, v in self.locally_constant_pairs():
            full, count = self.t_full[(D, v)]
            if count != 1:
                return False
            SD, iD = self.values[D]
            Sv, iv = self.values[v]
            plain = iD.mat @ self.system.restriction(D, v) % self.m
            img = self.t[(D, v)].mat @ iv.mat % self.m
            if self.system.carrier(v).reduce((img - plain) % self.m).any():
                return False
        return True

    def to_json(self) -> dict:
        reg = self.region
        return {
            "region": reg.summary(),
            "values": {str(F): self.values[F][0].to_json() for F in self.values},
            "transitions": [
                {"chamber": D, "vertex": v, "cosets": self.t_full[(D, v)][1], "matrix": rl.matrix_to_json(self.t[(D, v)].mat, self.m)}
                for (D, v) in sorted(self.t)
            ],
        }


def apartment_system(system: CoeffSystem, N: int | None = None) -> ApartmentSystem:
    """F^I on the truncated apartment of radius N (default: the system's radius)."""
    reg = system.region
    if reg.kind != "apartment" or (N is not None and N != reg.N):
        reg = build_region("apartment", system.gd, reg.N if N is None else N)
        system = CoeffSystem(system.diagram, reg)
    return ApartmentSystem(system)


def check_category_C(system: CoeffSystem, N: int | None = None) -> Report:
    """Condition (H) on the closed chamber and bijective locally constant transitions."""
    rep = Report(True)
    for F in FACES:
        rep.checks[f"condition_H_{F}"] = check_condition_H(system.diagram.reps[F]).ok
    A = apartment_system(system, N)
    bad = [(D, v) for D, v in A.locally_constant_pairs() if not A.transition(D, v).is_bijective()]
    rep.checks["transitions_bijective"] = not bad
    if bad:
        rep.checks["witness"] = bad[0]
    rep.ok = all(v for k, v in rep.checks.items() if k != "witness")
    return rep


# ---------------------------------------------------------------------------
# Hecke operators tau_gamma on apartment vertices


@dataclass
class TauGamma:
    vertex: int
    chamber: int
    unit: bool
    bijective: bool
    square_commutes: bool


def tau_gamma_checks(A: ApartmentSystem) -> list[TauGamma]:
    """For each apartment vertex v and chamber D containing v with D != C(v):
    tau_gamma for gamma in P_v with gamma C(v) = D, its invertibility in H_[v],
    its bijectivity on F^I_v and the commutativity t^D_v c_gamma = tau_gamma t^{C(v)}_v."""
    sysm, reg, gd, m = A.system, A.region, A.gd, A.m
    out = []
    for v in reg.vertices:
        fv = reg.faces[v]
        Cv = fv.closest
        for D in fv.chambers:
            if D == Cv:
                continue
            ns = n_s0(gd.q) if fv.label == "x0" else n_s1(gd.q)
            gamma = fv.gamma.inv() @ ns @ fv.gamma
            if reg.image(gamma, Cv) != D:
                raise CoeffError("gamma does not move C(v) to D")
            V = sysm.value(v)
            inv, incl = invariants(V, "I")
            alg = inv.algebra
            w = simple(gd, 0 if fv.label == "x0" else 1)
            idx = alg.basis.index(w)
            e = np.zeros(alg.rank, dtype=np.int64)
            e[idx] = 1
            unit = alg.is_unit(e)
            Sv, iv = A.values[v]
            # tau_gamma on F^I_v = V^I (same submodule, possibly other coordinates)
            conv = _solve_into(incl, iv.mat)
            back = _solve_into(iv, incl.mat)
            if conv is None or back is None:
                raise CoeffError("apartment invariants differ from the standard invariants")
            op = conv @ inv.ops[idx].T @ back % m
            bij = ModuleMap(Sv, Sv, op).is_bijective()
            # square on F_{C(v)} = D_C
            fD, fC = reg.faces[D], reg.faces[Cv]
            c = sysm.act("C", fD.gamma @ gamma @ fC.gamma.inv())
            lhs_full = c @ A.t_full[(D, v)][0] % m
            SC, iC = A.values[Cv]
            tC = A.t[(Cv, v)].mat  # SC -> Sv
            # D_C = F^I_{C(v)}: express through iC
            rhs = tC @ op @ iv.mat % m  # rows of SC generators, in V coordinates
            lhs = iC.mat @ lhs_full % m
            sq = not V.carrier.reduce((lhs - rhs) % m).any()
            out.append(TauGamma(v, D, bool(unit), bool(bij), sq))
    return out
