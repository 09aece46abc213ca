"""Pro-p Iwahori-Hecke algebras of rank-one groups over Z/m.

Products of basis elements are computed by peeling the letters of the right
factor: a length-increasing letter just extends the word, a length-decreasing
one uses the quadratic relation

    tau_u tau_s = q tau_{u n_s} + tau_u theta_s     (l(u n_s) < l(u)).

Basis products have integer structure constants, cached over Z and reduced
mod m on demand.  Parahoric subalgebras get explicit ``FiniteAlgebra``
tables; modules over the whole algebra are given by generator matrices and
validated against the defining relations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import ring_linalg as rl
from .ring_linalg import LinalgError, ModuleMap, PresentedModule
from .weyl import (
    GroupData,
    WeylElt,
    WeylError,
    identity,
    multiply,
    omega_elt,
    parahoric_basis,
    simple,
)


class HeckeError(ValueError):
    pass


class RelationError(HeckeError):
    """A module fails a defining relation; carries the relation name and a witness generator."""

    def __init__(self, relation: str, witness=None):
        self.relation = relation
        self.witness = witness
        super().__init__(f"relation violated: {relation}" + (f" (witness generator {witness})" if witness is not None else ""))


# ---------------------------------------------------------------------------
# basis products over Z


@lru_cache(maxsize=None)
def _right_mult_letter(gd: GroupData, u: WeylElt, i: int) -> tuple[tuple[WeylElt, int], ...]:
    """tau_u * tau_{n_i} as integer combination."""
    us = multiply(gd, u, simple(gd, i))
    if us.length > u.length:
        return ((us, 1),)
    out = {us: gd.q}
    for h in gd.theta_support:
        uh = multiply(gd, u, WeylElt(h))
        out[uh] = out.get(uh, 0) + 1
    return tuple(out.items())


@lru_cache(maxsize=200000)
def basis_product(gd: GroupData, v: WeylElt, w: WeylElt) -> tuple[tuple[WeylElt, int], ...]:
    """Integer structure constants of tau_v * tau_w."""
    cur = {multiply(gd, v, WeylElt(w.t)): 1}
    for i in w.letters:
        nxt: dict[WeylElt, int] = {}
        for u, c in cur.items():
            for x, d in _right_mult_letter(gd, u, i):
                nxt[x] = nxt.get(x, 0) + c * d
        cur = nxt
    if w.omega:
        om = omega_elt(gd, w.omega)
        cur = {multiply(gd, u, om): c for u, c in cur.items()}
    return tuple((u, c) for u, c in cur.items() if c)


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class HeckeElt:
    gd: GroupData
    m: int
    coeffs: tuple  # sorted tuple of (WeylElt, residue != 0)

    @classmethod
    def from_dict(cls, gd: GroupData, m: int, d: dict) -> "HeckeElt":
        items = sorted((w, c % m) for w, c in d.items() if c % m)
        return cls(gd, m, tuple(items))

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def _check(self, other: "HeckeElt"):
        if self.gd != other.gd or self.m != other.m:
            raise HeckeError("group/ring mismatch")

    def __add__(self, other: "HeckeElt") -> "HeckeElt":
        self._check(other)
        d = self.as_dict()
        for w, c in other.coeffs:
            d[w] = d.get(w, 0) + c
        return HeckeElt.from_dict(self.gd, self.m, d)

    def __neg__(self) -> "HeckeElt":
        return HeckeElt.from_dict(self.gd, self.m, {w: -c for w, c in self.coeffs})

    def __sub__(self, other: "HeckeElt") -> "HeckeElt":
        return self + (-other)

    def scale(self, a: int) -> "HeckeElt":
        return HeckeElt.from_dict(self.gd, self.m, {w: a * c for w, c in self.coeffs})

    def __mul__(self, other: "HeckeElt") -> "HeckeElt":
        return tau_multiply(self, other)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, w: WeylElt) -> int:
        return self.as_dict().get(w, 0)

    def to_json(self) -> dict:
        return {"ring": f"zmod:{self.m}", "group": self.gd.to_json(), "terms": [{"w": w.to_json(), "c": c} for w, c in self.coeffs]}

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c}*tau[{w.label()}]" for w, c in self.coeffs)


def tau(gd: GroupData, m: int, w: WeylElt, c: int = 1) -> HeckeElt:
    return HeckeElt.from_dict(gd, m, {w: c})


def one(gd: GroupData, m: int) -> HeckeElt:
    return tau(gd, m, identity(gd))


def tau_multiply(a: HeckeElt, b: HeckeElt) -> HeckeElt:
    a._check(b)
    out: dict[WeylElt, int] = {}
    for v, c in a.coeffs:
        for w, d in b.coeffs:
            for u, e in basis_product(a.gd, v, w):
                out[u] = out.get(u, 0) + c * d * e
    return HeckeElt.from_dict(a.gd, a.m, out)


def theta_element(gd: GroupData, m: int, i: int) -> HeckeElt:
    """theta_s: sum over x in F_q^x of tau of the coroot class h_s(x)."""
    if i not in (0, 1):
        raise HeckeError("s must be s0 or s1")
    d: dict[WeylElt, int] = {}
    for h in gd.theta_support:
        d[WeylElt(h)] = d.get(WeylElt(h), 0) + 1
    return HeckeElt.from_dict(gd, m, d)


# ---------------------------------------------------------------------------
# finite algebras


class FiniteAlgebra:
    """Free Z/m-algebra with a distinguished basis of Weyl elements."""

    def __init__(self, gd: GroupData, m: int, basis: list[WeylElt], key, table: np.ndarray | None = None):
        self.gd = gd
        self.m = m
        self.basis = list(basis)
        self.index = {w: i for i, w in enumerate(self.basis)}
        self.key = key
        n = len(self.basis)
        if table is None:
            table = np.zeros((n, n, n), dtype=np.int64)
            for i, v in enumerate(self.basis):
                for j, w in enumerate(self.basis):
                    for u, c in basis_product(gd, v, w):
                        if u not in self.index:
                            raise HeckeError(f"basis not closed: {v.label()}*{w.label()} involves {u.label()}")
                        table[i, j, self.index[u]] += c
            table %= m
        self.table = table
        self._verify()

    @property
    def rank(self) -> int:
        return len(self.basis)

    @cached_property
    def unit_index(self) -> int:
        return self.index[identity(self.gd)]

    def _verify(self):
        n, m, C = self.rank, self.m, self.table
        e = self.unit_index
        if not (np.array_equal(C[e], np.eye(n, dtype=np.int64) % m) and np.array_equal(C[:, e], np.eye(n, dtype=np.int64) % m)):
            raise HeckeError("unit axiom fails")
        # (e_i e_j) e_k = e_i (e_j e_k)
        lhs = np.einsum("ijl,lkr->ijkr", C, C) % m
        rhs = np.einsum("jkl,ilr->ijkr", C, C) % m
        if not np.array_equal(lhs, rhs):
            raise HeckeError("structure constants are not associative")

    def left_matrix(self, i: int) -> np.ndarray:
        """Column-convention matrix of left multiplication by e_i."""
        return self.table[i].T.copy()

    def right_matrix(self, i: int) -> np.ndarray:
        """Row-convention matrix of right multiplication by e_i."""
        return self.table[:, i, :].copy()

    def multiply_vectors(self, x, y) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(x), np.asarray(y), self.table) % self.m

    def element(self, x) -> HeckeElt:
        return HeckeElt.from_dict(self.gd, self.m, {w: int(c) for w, c in zip(self.basis, x)})

    def vector(self, h: HeckeElt) -> np.ndarray:
        v = np.zeros(self.rank, dtype=np.int64)
        for w, c in h.coeffs:
            if w not in self.index:
                raise HeckeError(f"{w.label()} not in the subalgebra")
            v[self.index[w]] = c
        return v

    def regular_module(self) -> "AlgebraModule":
        return AlgebraModule(self, PresentedModule.free(self.m, self.rank), [self.left_matrix(i) for i in range(self.rank)])

    def regular_right_ops(self) -> list[np.ndarray]:
        return [self.right_matrix(i) for i in range(self.rank)]

    def is_unit(self, x) -> bool:
        L = np.einsum("j,ijk->ik", np.asarray(x) % self.m, self.table) % self.m  # row i: e_i * x
        return rl.matrix_is_invertible(L, self.m)

    def to_json(self) -> dict:
        return {
            "key": list(map(str, self.key)),
            "basis": [w.to_json() for w in self.basis],
            "structure_constants": [[self.table[i, j].tolist() for j in range(self.rank)] for i in range(self.rank)],
        }


_ALGEBRAS: dict = {}


def parahoric_algebra(gd: GroupData, m: int, F: str, dagger: bool = False) -> FiniteAlgebra:
    if dagger and gd.kind == "gl2":
        raise HeckeError("dagger algebras are not available for GL2 (Omega_F is infinite)")
    if dagger and F != "C":
        dagger = False  # Omega_x is trivial at vertices
    key = ("H_F", gd.kind, gd.q, m, F, bool(dagger))
    if key not in _ALGEBRAS:
        try:
            basis = parahoric_basis(gd, F, dagger)
        except WeylError as e:
            raise HeckeError(str(e)) from e
        _ALGEBRAS[key] = FiniteAlgebra(gd, m, basis, key)
    return _ALGEBRAS[key]


def has_dagger(gd: GroupData, F: str) -> bool:
    return F == "C" and gd.kind == "pgl2"


# ---------------------------------------------------------------------------
# modules


def _ops_equal(M: PresentedModule, X: np.ndarray, Y: np.ndarray):
    """None if the column-convention operators X, Y agree on M, else a witness generator."""
    D = (np.asarray(X) - np.asarray(Y)).T % M.m
    bad = ~M.in_relations(D)
    return int(np.flatnonzero(bad)[0]) if bad.any() else None


def _preserves(M: PresentedModule, X: np.ndarray) -> bool:
    return not M.rel.shape[0] or bool(M.in_relations(M.rel @ X.T % M.m).all())


@dataclass
class AlgebraModule:
    """Left module over a FiniteAlgebra: one column-convention matrix per basis element."""

    algebra: FiniteAlgebra
    carrier: PresentedModule
    ops: list

    def __post_init__(self):
        self.ops = [np.asarray(A, dtype=np.int64) % self.carrier.m for A in self.ops]

    def row_ops(self) -> list[np.ndarray]:
        return [A.T for A in self.ops]

    def act(self, x) -> np.ndarray:
        m = self.carrier.m
        n = self.carrier.n
        out = np.zeros((n, n), dtype=np.int64)
        for c, A in zip(np.asarray(x) % m, self.ops):
            if c:
                out = (out + c * A) % m
        return out

    def validate(self) -> "AlgebraModule":
        M, A, C, m = self.carrier, self.algebra, self.algebra.table, self.carrier.m
        if len(self.ops) != A.rank:
            raise RelationError("one operator per basis element")
        for i, X in enumerate(self.ops):
            if not _preserves(M, X):
                raise RelationError(f"operator {A.basis[i].label()} preserves relations")
        w = _ops_equal(M, self.ops[A.unit_index], np.eye(M.n, dtype=np.int64))
        if w is not None:
            raise RelationError("unit acts as identity", w)
        for i in range(A.rank):
            for j in range(A.rank):
                w = _ops_equal(M, self.ops[i] @ self.ops[j] % m, self.act(C[i, j]))
                if w is not None:
                    raise RelationError(f"multiplication {A.basis[i].label()}*{A.basis[j].label()}", w)
        return self

    def is_zero(self) -> bool:
        return self.carrier.order == 1


def restrict_operators(M: "HModule", A: FiniteAlgebra) -> list[np.ndarray]:
    return [M.act(w) for w in A.basis]


def restrict_module(M: "HModule", F: str, dagger: bool = False) -> AlgebraModule:
    A = parahoric_algebra(M.gd, M.m, F, dagger)
    return AlgebraModule(A, M.carrier, restrict_operators(M, A))


class HModule:
    """Module over the full pro-p Iwahori-Hecke algebra H.

    Generator matrices are in column convention: ``S[i]`` for tau_{n_si},
    ``T[c]`` for the c-th cyclic generator of T0/T1, ``Om`` for tau_omega.
    """

    def __init__(self, gd: GroupData, carrier: PresentedModule, S, T, Om=None, validate: bool = True):
        self.gd = gd
        self.carrier = carrier
        m = carrier.m
        self.m = m
        self.S = [np.asarray(X, dtype=np.int64) % m for X in S]
        self.T = [np.asarray(X, dtype=np.int64) % m for X in T]
        self.Om = None if Om is None else np.asarray(Om, dtype=np.int64) % m
        self.algebra = _HKey(("H", gd.kind, gd.q, m))
        self._cache: dict = {}
        if validate:
            self.validate()

    @property
    def n(self) -> int:
        return self.carrier.n

    def row_ops(self) -> list[np.ndarray]:
        ops = self.S + self.T + ([self.Om] if self.Om is not None else [])
        return [X.T for X in ops]

    def torus(self, t) -> np.ndarray:
        key = ("t", tuple(t))
        if key not in self._cache:
            mats = [rl.matpow(X, int(e), self.m) for X, e in zip(self.T, t)]
            self._cache[key] = rl.mat_product(mats, self.n, self.m)
        return self._cache[key]

    def _omega_power(self, k: int) -> np.ndarray:
        if k == 0:
            return np.eye(self.n, dtype=np.int64)
        if self.Om is None:
            raise HeckeError("module has no omega action")
        if k > 0:
            return rl.matpow(self.Om, k, self.m)
        return rl.matpow(self._omega_inverse(), -k, self.m)

    def _omega_inverse(self) -> np.ndarray:
        if "oinv" not in self._cache:
            # a bijection of a finite module has finite order
            X = self.Om
            P = X.copy()
            eye = np.eye(self.n, dtype=np.int64)
            prev = eye
            for _ in range(self.carrier.order + 1):
                if _ops_equal(self.carrier, P, eye) is None:
                    self._cache["oinv"] = prev
                    break
                prev = P
                P = P @ X % self.m
            else:
                raise HeckeError("tau_omega is not invertible on the module")
        return self._cache["oinv"]

    def act(self, w: WeylElt) -> np.ndarray:
        if w not in self._cache:
            X = self.torus(w.t)
            for i in w.letters:
                X = X @ self.S[i] % self.m
            if w.omega:
                X = X @ self._omega_power(w.omega) % self.m
            self._cache[w] = X
        return self._cache[w]

    def act_elt(self, h: HeckeElt) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.int64)
        for w, c in h.coeffs:
            out = (out + c * self.act(w)) % self.m
        return out

    def theta_matrix(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.int64)
        for h in self.gd.theta_support:
            out = (out + self.torus(h)) % self.m
        return out

    def validate(self) -> "HModule":
        gd, M, m = self.gd, self.carrier, self.m
        n = self.n
        eye = np.eye(n, dtype=np.int64)

        def need(cond_witness, name):
            if cond_witness is not None:
                raise RelationError(name, cond_witness)

        if len(self.S) != 2 or len(self.T) != len(gd.torus_orders):
            raise RelationError("generator count")
        if gd.kind != "sl2" and self.Om is None:
            raise RelationError("omega action required for PGL2/GL2")
        if gd.kind == "sl2" and self.Om is not None:
            raise RelationError("SL2 has trivial Omega")
        for name, X in [("s0", self.S[0]), ("s1", self.S[1])] + [(f"t{c}", X) for c, X in enumerate(self.T)] + (
            [("omega", self.Om)] if self.Om is not None else []
        ):
            if X.shape != (n, n):
                raise RelationError(f"{name} has wrong shape")
            if not _preserves(M, X):
                raise RelationError(f"{name} preserves the carrier relations")
        # torus group
        for c, (X, o) in enumerate(zip(self.T, gd.torus_orders)):
            need(_ops_equal(M, rl.matpow(X, o, m), eye), f"t{c}^{o} = 1")
        for a in range(len(self.T)):
            for b in range(a + 1, len(self.T)):
                need(_ops_equal(M, self.T[a] @ self.T[b] % m, self.T[b] @ self.T[a] % m), "torus commutes")
        gens = [tuple(int(c == k) % o for k, o in enumerate(gd.torus_orders)) for c in range(len(gd.torus_orders))]
        for i in (0, 1):
            A = self.S[i]
            for t in gens:
                need(_ops_equal(M, A @ self.torus(t) % m, self.torus(gd.s_conj[t]) @ A % m), f"tau_s{i} tau_t = tau_(s t s^-1) tau_s{i}")
            quad = (gd.q * self.torus(gd.square) + A @ self.theta_matrix()) % m
            need(_ops_equal(M, A @ A % m, quad), f"quadratic relation for s{i}")
        if self.Om is not None:
            O = self.Om
            if not ModuleMap(M, M, O.T).is_bijective():
                raise RelationError("tau_omega invertible")
            for t in gens:
                need(_ops_equal(M, O @ self.torus(t) % m, self.torus(gd.omega_conj[t]) @ O % m), "tau_omega tau_t = tau_(w t w^-1) tau_omega")
            need(_ops_equal(M, O @ self.S[0] % m, self.S[1] @ O % m), "tau_omega tau_s0 = tau_s1 tau_omega")
            need(_ops_equal(M, O @ self.S[1] % m, self.S[0] @ O % m), "tau_omega tau_s1 = tau_s0 tau_omega")
            if gd.kind == "pgl2":
                need(_ops_equal(M, O @ O % m, eye), "tau_omega^2 = 1")
        return self

    def is_zero(self) -> bool:
        return self.carrier.order == 1

    def restrict(self, F: str, dagger: bool = False) -> AlgebraModule:
        return restrict_module(self, F, dagger)

    def to_json(self) -> dict:
        act = {"s0": self.S[0].tolist(), "s1": self.S[1].tolist()}
        for c, X in enumerate(self.T):
            act[f"t{c}"] = X.tolist()
        if self.Om is not None:
            act["omega"] = self.Om.tolist()
        out = {"ring": f"zmod:{self.m}", "group": self.gd.to_json(), "rank": self.n, "action": act}
        if self.carrier.rel.shape[0]:
            out["relations"] = rl.matrix_to_json(self.carrier.rel, self.m)
        return out

    @classmethod
    def from_json(cls, d: dict, validate: bool = True) -> "HModule":
        m = rl.RingZm.parse(d["ring"]).m
        gd = GroupData(d["group"]["kind"], int(d["group"]["q"]))
        n = int(d["rank"])
        act = d["action"]

        def mat(key):
            X = np.asarray(act[key], dtype=np.int64).reshape(n, n) if n else np.zeros((0, 0), dtype=np.int64)
            return X

        rel = rl.matrix_from_json(d["relations"]) if d.get("relations") else None
        carrier = PresentedModule.make(m, n, rel)
        T = [mat(f"t{c}") if f"t{c}" in act else np.eye(n, dtype=np.int64) for c in range(len(gd.torus_orders))]
        Om = mat("omega") if "omega" in act else None
        return cls(gd, carrier, [mat("s0"), mat("s1")], T, Om, validate=validate)

    def __repr__(self) -> str:
        return f"HModule({self.gd.kind}, q={self.gd.q}, m={self.m}, rank={self.n}, |M|={self.carrier.order})"


@dataclass(frozen=True)
class _HKey:
    key: tuple


def zero_module(gd: GroupData, m: int) -> HModule:
    z = np.zeros((0, 0), dtype=np.int64)
    return HModule(gd, PresentedModule.free(m, 0), [z, z], [z] * len(gd.torus_orders), None if gd.kind == "sl2" else z)


def validate_module(data: dict) -> HModule:
    return HModule.from_json(data, validate=True)


def sub_hmodule(M: HModule, gens) -> HModule:
    """H-submodule generated by the given carrier vectors (rows)."""
    ops = M.row_ops()
    G = rl.howell_form(rl.as_rows(gens, M.n) % M.m, M.m)
    while True:
        new = rl.howell_form(np.vstack([G] + [G @ X % M.m for X in ops] + ([M.carrier.rel] if M.carrier.rel.shape[0] else [])), M.m)
        if new.shape == G.shape and np.array_equal(new, G):
            break
        G = new
    S, incl = rl.submodule(M.carrier, G)
    res = lambda X: rl.restrict_operator(incl, X.T).T
    return HModule(M.gd, S, [res(X) for X in M.S], [res(X) for X in M.T], None if M.Om is None else res(M.Om))


def quotient_hmodule(M: HModule, gens) -> HModule:
    """Quotient by the H-submodule generated by the given vectors."""
    ops = M.row_ops()
    G = rl.howell_form(rl.as_rows(gens, M.n) % M.m, M.m)
    while True:
        new = rl.howell_form(np.vstack([G] + [G @ X % M.m for X in ops]), M.m)
        if new.shape == G.shape and np.array_equal(new, G):
            break
        G = new
    Q, _ = rl.quotient(M.carrier, G)
    return HModule(M.gd, Q, M.S, M.T, M.Om)
