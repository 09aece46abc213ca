"""Exact linear algebra over Z/m and finitely presented Z/m-modules.

Vectors are rows.  A module is ``R^n / rowspan(rel)`` with ``rel`` in Howell
form, so equal relation spans give identical matrices and every element has a
canonical reduced representative.

Operators passed to the generic routines here (``intertwiners``,
``balanced_tensor``) act on the right of row vectors: ``v -> v @ X``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property, reduce
from math import gcd, prod

import numpy as np

if os.environ.get("HKCOEFF_PURE"):
    from hkcoeff._howell_py import howell_form as _kernel

    KERNEL = "python"
else:
    try:
        from hkcoeff._howell import howell_form as _kernel

        KERNEL = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        from hkcoeff._howell_py import howell_form as _kernel

        KERNEL = "python"


class LinalgError(ValueError):
    pass


def factorize(m: int) -> tuple[tuple[int, int], ...]:
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            out.append((d, e))
        d += 1
    if m > 1:
        out.append((m, 1))
    return tuple(out)


@dataclass(frozen=True)
class RingZm:
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise LinalgError("modulus must be at least 2")

    @cached_property
    def factorization(self) -> tuple[tuple[int, int], ...]:
        return factorize(self.m)

    @cached_property
    def divisors(self) -> tuple[int, ...]:
        return tuple(d for d in range(1, self.m + 1) if self.m % d == 0)

    def is_unit(self, a: int) -> bool:
        return gcd(a % self.m, self.m) == 1

    def inverse(self, a: int) -> int:
        return pow(a % self.m, -1, self.m)

    def units(self) -> list[int]:
        return [a for a in range(1, self.m) if gcd(a, self.m) == 1] or [0]

    def is_prime_power_of(self, p: int) -> bool:
        return len(self.factorization) == 1 and self.factorization[0][0] == p

    def __str__(self) -> str:
        return f"zmod:{self.m}"

    @classmethod
    def parse(cls, text: str) -> "RingZm":
        if isinstance(text, int):
            return cls(text)
        text = str(text).strip().lower()
        for prefix in ("zmod:", "z/"):
            if text.startswith(prefix):
                text = text[len(prefix):]
        return cls(int(text))


def as_rows(V, n: int) -> np.ndarray:
    """View V as a matrix of row vectors of length n (tolerates n = 0)."""
    V = np.asarray(V, dtype=np.int64)
    if n == 0:
        return np.zeros((V.shape[0] if V.ndim == 2 else 0, 0), dtype=np.int64)
    return V.reshape(-1, n)


def howell_form(A, m: int) -> np.ndarray:
    """Canonical Howell matrix of the row span of ``A`` over Z/m."""
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise LinalgError("howell_form expects a 2-d matrix")
    if A.shape[0] == 0 or A.shape[1] == 0:
        return np.zeros((0, A.shape[1]), dtype=np.int64)
    return _kernel(A % m, m)


def pivots(H: np.ndarray) -> list[tuple[int, int]]:
    """(column, pivot value) of each row of a Howell matrix."""
    out = []
    for row in H:
        nz = np.flatnonzero(row)
        out.append((int(nz[0]), int(row[nz[0]])))
    return out


def span_order(H: np.ndarray, m: int) -> int:
    return prod(m // p for _, p in pivots(H))


def reduce_rows(V: np.ndarray, H: np.ndarray, m: int) -> np.ndarray:
    """Reduce each row of ``V`` against the Howell matrix ``H``."""
    V = np.array(V, dtype=np.int64, copy=True) % m
    if V.ndim == 1:
        return reduce_rows(V.reshape(1, -1), H, m)[0]
    for row, (j, p) in zip(H, pivots(H)):
        f = V[:, j] // p
        if f.any():
            V = (V - np.outer(f, row)) % m
    return V


def left_kernel(A, m: int) -> np.ndarray:
    """Generators (rows) of {x : x A = 0} over Z/m."""
    A = np.asarray(A, dtype=np.int64) % m
    r, c = A.shape
    if r == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if c == 0:
        return np.eye(r, dtype=np.int64)
    H = howell_form(np.hstack([A, np.eye(r, dtype=np.int64)]), m)
    K = H[~H[:, :c].any(axis=1), c:]
    return K


def solve_linear(A, b, m: int):
    """Solve ``x A = b`` over Z/m.

    Returns ``(x, kernel_generators)`` or ``None`` when no solution exists.
    """
    A = np.asarray(A, dtype=np.int64) % m
    b = np.asarray(b, dtype=np.int64).reshape(-1) % m
    r, c = A.shape
    if b.size != c:
        raise LinalgError(f"dimension mismatch: A is {r}x{c}, b has length {b.size}")
    if r == 0:
        return (np.zeros(0, dtype=np.int64), np.zeros((0, 0), dtype=np.int64)) if not b.any() else None
    H = howell_form(np.hstack([A, np.eye(r, dtype=np.int64)]), m)
    v = np.concatenate([b, np.zeros(r, dtype=np.int64)])
    for row, (j, p) in zip(H, pivots(H)):
        if j >= c:
            break
        if v[j] % p:
            return None
        v = (v - (v[j] // p) * row) % m
    if v[:c].any():
        return None
    x = (-v[c:]) % m
    K = H[~H[:, :c].any(axis=1), c:]
    return x, K


def solve_many(A, B, m: int) -> np.ndarray | None:
    """Row-wise solutions X with X A = B, or None if some row is unsolvable."""
    A = np.asarray(A, dtype=np.int64) % m
    B = np.asarray(B, dtype=np.int64) % m
    r, c = A.shape
    if B.shape[0] == 0:
        return np.zeros((0, r), dtype=np.int64)
    if r == 0:
        return None if B.any() else np.zeros((B.shape[0], 0), dtype=np.int64)
    H = howell_form(np.hstack([A, np.eye(r, dtype=np.int64)]), m)
    V = np.hstack([B, np.zeros((B.shape[0], r), dtype=np.int64)])
    for row, (j, p) in zip(H, pivots(H)):
        if j >= c:
            break
        if (V[:, j] % p).any():
            return None
        V = (V - np.outer(V[:, j] // p, row)) % m
    if V[:, :c].any():
        return None
    return (-V[:, c:]) % m


def right_annihilator(rel: np.ndarray, n: int, m: int) -> np.ndarray:
    """Matrix K (n x t) whose columns span {k : rel k = 0}.

    Over the quasi-Frobenius ring Z/m a row vector lies in rowspan(rel) iff
    it is killed by K.
    """
    if rel.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    K = left_kernel(rel.T, m)
    return howell_form(K, m).T.copy()


@dataclass(frozen=True, eq=False)
class PresentedModule:
    """The Z/m-module R^n / rowspan(rel), with ``rel`` in Howell form."""

    m: int
    n: int
    rel: np.ndarray = field(repr=False)

    @classmethod
    def make(cls, m: int, n: int, relations=None) -> "PresentedModule":
        if relations is None or n == 0:
            R = np.zeros((0, n), dtype=np.int64)
        else:
            R = as_rows(relations, n)
        H = howell_form(R, m) if R.shape[0] else np.zeros((0, n), dtype=np.int64)
        H.setflags(write=False)
        return cls(m, n, H)

    @classmethod
    def free(cls, m: int, n: int) -> "PresentedModule":
        return cls.make(m, n)

    @classmethod
    def zero(cls, m: int) -> "PresentedModule":
        return cls.make(m, 0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PresentedModule)
            and self.m == other.m
            and self.n == other.n
            and self.rel.shape == other.rel.shape
            and bool((self.rel == other.rel).all())
        )

    def __hash__(self) -> int:
        return hash((self.m, self.n, self.rel.tobytes()))

    @cached_property
    def order(self) -> int:
        return self.m ** self.n // span_order(self.rel, self.m)

    @cached_property
    def annihilator(self) -> np.ndarray:
        return right_annihilator(self.rel, self.n, self.m)

    def is_zero_module(self) -> bool:
        return self.order == 1

    def is_free(self) -> bool:
        return self.rel.shape[0] == 0

    def reduce(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=np.int64)
        if self.rel.shape[0] == 0:
            return V % self.m
        return reduce_rows(V, self.rel, self.m)

    def is_zero(self, v) -> bool:
        return not self.reduce(v).any()

    def in_relations(self, V) -> np.ndarray:
        """Boolean per row of V: does it vanish in the module?"""
        if self.n == 0:
            V = np.asarray(V)
            return np.ones(V.shape[0] if V.ndim == 2 else 0, dtype=bool)
        V = as_rows(V, self.n)
        return ~self.reduce(V).any(axis=1)

    def elements(self):
        """Enumerate canonical representatives (small modules only)."""
        if self.order > 1 << 16:
            raise LinalgError("module too large to enumerate")
        gens = [np.eye(self.n, dtype=np.int64)[i] for i in range(self.n)]
        seen = {tuple(np.zeros(self.n, dtype=np.int64))}
        frontier = list(seen)
        while frontier:
            new = []
            for v in frontier:
                for g in gens:
                    w = tuple(self.reduce(np.array(v) + g))
                    if w not in seen:
                        seen.add(w)
                        new.append(w)
            frontier = new
        return sorted(seen)

    def torsion_profile(self) -> tuple[int, ...]:
        """|M / dM| for every divisor d of m; determines the isomorphism type."""
        out = []
        for d in RingZm(self.m).divisors:
            S = np.vstack([self.rel, d * np.eye(self.n, dtype=np.int64)])
            out.append(self.m ** self.n // span_order(howell_form(S, self.m), self.m) if self.n else 1)
        return tuple(out)

    def invariant_factors(self) -> list[int]:
        """Cyclic orders d_1 | d_2 | ... with M = sum Z/d_i (trivial ones dropped)."""
        parts: dict[int, list[int]] = {}
        for p, e in RingZm(self.m).factorization:
            counts = []
            for k in range(e + 1):
                S = np.vstack([self.rel, p**k * np.eye(self.n, dtype=np.int64)])
                size = self.m ** self.n // span_order(howell_form(S, self.m), self.m) if self.n else 1
                counts.append(_p_part(size, p))
            # counts[k] = |M / p^k M|; summands of order >= p^(k+1)
            ge = [_log(counts[k + 1] // counts[k], p) for k in range(e)]
            exps = []
            for k in range(e):
                exact = ge[k] - (ge[k + 1] if k + 1 < e else 0)
                exps += [k + 1] * exact
            parts[p] = sorted(exps, reverse=True)
        length = max((len(v) for v in parts.values()), default=0)
        factors = []
        for i in range(length):
            factors.append(prod(p ** v[i] for p, v in parts.items() if i < len(v)))
        return sorted(factors)

    def is_isomorphic(self, other: "PresentedModule") -> bool:
        return self.m == other.m and self.torsion_profile() == other.torsion_profile()

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "rank": self.n,
            "relations": matrix_to_json(self.rel, self.m),
            "invariant_factors": self.invariant_factors(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "PresentedModule":
        rel = matrix_from_json(d["relations"])
        return cls.make(int(d["m"]), int(d["rank"]), rel)


def _p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def _log(n: int, p: int) -> int:
    k = 0
    while n > 1:
        n //= p
        k += 1
    return k


def matrix_to_json(A, m: int) -> dict:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        A = A.reshape(1, -1) if A.size else A.reshape(0, 0)
    return {"m": m, "rows": int(A.shape[0]), "cols": int(A.shape[1]), "entries": [int(x) for x in A.reshape(-1) % m]}


def matrix_from_json(d: dict) -> np.ndarray:
    return np.asarray(d["entries"], dtype=np.int64).reshape(d["rows"], d["cols"]) % d["m"]


@dataclass(frozen=True, eq=False)
class ModuleMap:
    """R-linear map given by the images of the domain generators (rows)."""

    dom: PresentedModule
    cod: PresentedModule
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=np.int64).reshape(self.dom.n, self.cod.n) % self.dom.m
        object.__setattr__(self, "mat", mat)
        if self.dom.m != self.cod.m:
            raise LinalgError("maps between modules over different rings")

    @classmethod
    def checked(cls, dom, cod, mat) -> "ModuleMap":
        f = cls(dom, cod, mat)
        bad = f.well_definedness_witness()
        if bad is not None:
            raise LinalgError(f"map is not well defined: relation {bad.tolist()} has nonzero image")
        return f

    def well_definedness_witness(self):
        if self.dom.rel.shape[0] == 0:
            return None
        img = self.cod.reduce(self.dom.rel @ self.mat)
        bad = np.flatnonzero(img.any(axis=1))
        return self.dom.rel[bad[0]] if bad.size else None

    def __call__(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=np.int64)
        return self.cod.reduce(V @ self.mat)

    def compose(self, first: "ModuleMap") -> "ModuleMap":
        """self o first."""
        return ModuleMap(first.dom, self.cod, first.mat @ self.mat)

    @cached_property
    def image_rows(self) -> np.ndarray:
        return howell_form(np.vstack([self.mat, self.cod.rel]), self.cod.m)

    @cached_property
    def image_order(self) -> int:
        return span_order(self.image_rows, self.cod.m) // span_order(self.cod.rel, self.cod.m)

    def is_injective(self) -> bool:
        return self.image_order == self.dom.order

    def is_surjective(self) -> bool:
        return self.image_order == self.cod.order

    def is_bijective(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def is_zero(self) -> bool:
        return self.image_order == 1

    def kernel_generators(self) -> np.ndarray:
        """Rows of domain coordinates generating ker(f)."""
        A = np.vstack([self.mat, self.cod.rel])
        K = left_kernel(A, self.dom.m)
        G = K[:, : self.dom.n]
        G = self.dom.reduce(G) if G.size else G
        G = G[G.any(axis=1)] if G.size else G.reshape(0, self.dom.n)
        return howell_form(G, self.dom.m) if G.shape[0] else G

    def preimage(self, v) -> np.ndarray | None:
        sol = solve_linear(np.vstack([self.mat, self.cod.rel]), v, self.dom.m)
        if sol is None:
            return None
        return sol[0][: self.dom.n]

    def equals(self, other: "ModuleMap") -> bool:
        return not self.cod.reduce((self.mat - other.mat) % self.cod.m).any()


def identity_map(M: PresentedModule) -> ModuleMap:
    return ModuleMap(M, M, np.eye(M.n, dtype=np.int64))


def submodule(P: PresentedModule, G) -> tuple[PresentedModule, ModuleMap]:
    """Present the submodule of P generated by the rows of G."""
    G = as_rows(G, P.n) % P.m
    if G.shape[0]:
        G = G[P.reduce(G).any(axis=1)]
    if G.shape[0] == 0:
        S = PresentedModule.zero(P.m)
        return S, ModuleMap(S, P, np.zeros((0, P.n), dtype=np.int64))
    G = P.reduce(howell_form(np.vstack([G, P.rel]), P.m))
    G = G[G.any(axis=1)]
    k = G.shape[0]
    if P.rel.shape[0]:
        K = left_kernel(np.vstack([G, P.rel]), P.m)[:, :k]
    else:
        K = left_kernel(G, P.m)
    S = PresentedModule.make(P.m, k, K)
    return S, ModuleMap(S, P, G)


def quotient(P: PresentedModule, G) -> tuple[PresentedModule, ModuleMap]:
    G = as_rows(G, P.n)
    Q = PresentedModule.make(P.m, P.n, np.vstack([P.rel, G]))
    return Q, ModuleMap(P, Q, np.eye(P.n, dtype=np.int64))


def restrict_operator(incl: ModuleMap, X: np.ndarray) -> np.ndarray:
    """Matrix on the submodule generators of the row operator X (v -> v X)."""
    P = incl.cod
    target = incl.mat @ X % P.m
    A = np.vstack([incl.mat, P.rel])
    sol = solve_many(A, target, P.m)
    if sol is None:
        raise LinalgError("operator does not preserve the submodule")
    return sol[:, : incl.dom.n]


def is_stable(incl: ModuleMap, X: np.ndarray) -> bool:
    P = incl.cod
    A = np.vstack([incl.mat, P.rel])
    return solve_many(A, incl.mat @ X % P.m, P.m) is not None


def simplify(M: PresentedModule) -> tuple[PresentedModule, ModuleMap, ModuleMap]:
    """Drop generators that relations express through later ones.

    Returns (M', to, back) with to: M -> M' and back: M' -> M inverse
    isomorphisms.
    """
    m, n = M.m, M.n
    keep = list(range(n))
    # express e_j via unit-pivot relation rows: e_j = -sum_{l>j} row_l e_l
    T = np.eye(n, dtype=np.int64)
    unit_rows = [(j, row) for row, (j, p) in zip(M.rel, pivots(M.rel)) if p == 1]
    if not unit_rows:
        return M, identity_map(M), identity_map(M)
    dropped = {j for j, _ in unit_rows}
    # process from the last pivot backwards so substitutions only use kept generators
    for j, row in sorted(unit_rows, key=lambda t: -t[0]):
        expr = (-row) % m
        expr[j] = 0
        T[j] = expr @ T % m
    keep = [j for j in range(n) if j not in dropped]
    to_mat = T[:, keep] % m
    back_mat = np.eye(n, dtype=np.int64)[keep]
    new_rel = M.rel @ T[:, keep] % m if M.rel.shape[0] else np.zeros((0, len(keep)), dtype=np.int64)
    M2 = PresentedModule.make(m, len(keep), new_rel)
    return M2, ModuleMap(M, M2, to_mat), ModuleMap(M2, M, back_mat)


def direct_sum(mods: list[PresentedModule]) -> PresentedModule:
    m = mods[0].m
    n = sum(M.n for M in mods)
    rows = []
    off = 0
    for M in mods:
        R = np.zeros((M.rel.shape[0], n), dtype=np.int64)
        R[:, off:off + M.n] = M.rel
        rows.append(R)
        off += M.n
    return PresentedModule.make(m, n, np.vstack(rows) if rows else None)


def block_diag(mats: list[np.ndarray]) -> np.ndarray:
    r = sum(A.shape[0] for A in mats)
    c = sum(A.shape[1] for A in mats)
    out = np.zeros((r, c), dtype=np.int64)
    i = j = 0
    for A in mats:
        out[i:i + A.shape[0], j:j + A.shape[1]] = A
        i += A.shape[0]
        j += A.shape[1]
    return out


def intertwiners(dom: PresentedModule, dom_ops, cod: PresentedModule, cod_ops):
    """R-module of maps F with F well defined and X_i F = F Y_i modulo relations.

    ``dom_ops``/``cod_ops`` are matched lists of row operators.  Returns
    (Hom, maps): Hom is a PresentedModule on generators ``maps`` (array of
    shape (r, dom.n, cod.n)).
    """
    m = dom.m
    n1, n2 = dom.n, cod.n
    if n1 == 0 or n2 == 0:
        return PresentedModule.zero(m), np.zeros((0, n1, n2), dtype=np.int64)
    K = cod.annihilator
    blocks = []
    if dom.rel.shape[0]:
        blocks.append(np.kron(dom.rel.T, K))
    eye1 = np.eye(n1, dtype=np.int64)
    for X, Y in zip(dom_ops, cod_ops):
        X = np.asarray(X, dtype=np.int64) % m
        Y = np.asarray(Y, dtype=np.int64) % m
        blocks.append((np.kron(X.T, K) - np.kron(eye1, Y @ K % m)) % m)
    E = np.hstack(blocks) if blocks else np.zeros((n1 * n2, 0), dtype=np.int64)
    S = left_kernel(E, m) if E.shape[1] else np.eye(n1 * n2, dtype=np.int64)
    EZ = np.kron(eye1, K) % m
    # discard generators that are already zero maps, then present Sol / Zero
    S = howell_form(S, m)
    S = S[(S @ EZ % m).any(axis=1)]
    if S.shape[0] == 0:
        return PresentedModule.zero(m), np.zeros((0, n1, n2), dtype=np.int64)
    rel = left_kernel(S @ EZ % m, m)
    H = PresentedModule.make(m, S.shape[0], rel)
    return H, S.reshape(-1, n1, n2)


def balanced_tensor(X: PresentedModule, X_ops, M: PresentedModule, M_ops) -> PresentedModule:
    """X (x) M over an algebra: generators e_i (x) f_j at index i*M.n + j.

    ``X_ops`` are the right actions on X and ``M_ops`` the left actions on M,
    both as row operators, matched by algebra generator.
    """
    m = X.m
    nx, nm = X.n, M.n
    rows = []
    if X.rel.shape[0]:
        rows.append(np.kron(X.rel, np.eye(nm, dtype=np.int64)))
    if M.rel.shape[0]:
        rows.append(np.kron(np.eye(nx, dtype=np.int64), M.rel))
    for R, Y in zip(X_ops, M_ops):
        rows.append((np.kron(R, np.eye(nm, dtype=np.int64)) - np.kron(np.eye(nx, dtype=np.int64), Y)) % m)
    return PresentedModule.make(m, nx * nm, np.vstack(rows) if rows else None)


def dual_module(M: PresentedModule) -> tuple[PresentedModule, np.ndarray]:
    """Hom_R(M, R): returns (M*, F) where column j of F is the functional of
    generator j (a vector k with rel k = 0)."""
    m = M.m
    if M.n == 0:
        return PresentedModule.zero(m), np.zeros((0, 0), dtype=np.int64)
    F = M.annihilator  # n x t
    F = F[:, F.any(axis=0)] if F.size else F
    t = F.shape[1]
    if t == 0:
        return PresentedModule.zero(m), np.zeros((M.n, 0), dtype=np.int64)
    rel = left_kernel(F.T, m)
    return PresentedModule.make(m, t, rel), F


def dual_operator(M: PresentedModule, F: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Row matrix on M* of the transpose of the row operator X on M.

    A functional k (column) is sent to k o X, i.e. the column X k.
    """
    m = M.m
    target = (X @ F % m).T
    sol = solve_many(F.T, target, m)
    if sol is None:
        raise LinalgError("operator does not act on the dual")
    return sol


def module_dual(M: PresentedModule) -> PresentedModule:
    return dual_module(M)[0]


def double_dual_map(M: PresentedModule) -> ModuleMap:
    """The evaluation map M -> M** in the presentation of dual_module twice."""
    D, F = dual_module(M)
    DD, G = dual_module(D)
    # generator e_i of M evaluates functional j to F[i, j]; find coordinates in DD
    target = F % M.m  # row i: values on the generators of D
    sol = solve_many(G.T, target, M.m)
    if sol is None:
        raise LinalgError("evaluation does not land in the double dual")
    return ModuleMap(M, DD, sol)


def module_hom_space(P, M):
    """Algebra-linear maps between two modules over the same finite algebra.

    ``P`` and ``M`` expose ``algebra``, ``carrier`` and ``row_ops()``.
    Returns (Hom, [ModuleMap ...]).
    """
    if P.algebra.key != M.algebra.key:
        raise LinalgError("modules over different algebras")
    H, maps = intertwiners(P.carrier, P.row_ops(), M.carrier, M.row_ops())
    return H, [ModuleMap(P.carrier, M.carrier, F) for F in maps]


def module_tensor(X, M) -> PresentedModule:
    """Balanced tensor product of a right module X and a left module M."""
    if X.algebra.key != M.algebra.key:
        raise LinalgError("modules over different algebras")
    return balanced_tensor(X.carrier, X.right_ops(), M.carrier, M.row_ops())


def find_isomorphism(P: PresentedModule, P_ops, M: PresentedModule, M_ops, rng=None, tries: int = 200):
    """Search the intertwiner space for a bijective map.  Returns a ModuleMap or None."""
    if P.torsion_profile() != M.torsion_profile():
        return None
    if P.order == 1:
        return ModuleMap(P, M, np.zeros((P.n, M.n), dtype=np.int64))
    H, maps = intertwiners(P, P_ops, M, M_ops)
    if maps.shape[0] == 0:
        return None
    for F in maps:
        f = ModuleMap(P, M, F)
        if f.is_bijective():
            return f
    rng = rng or np.random.default_rng(0)
    for _ in range(tries):
        c = rng.integers(0, P.m, maps.shape[0])
        F = np.tensordot(c, maps, axes=1) % P.m
        f = ModuleMap(P, M, F)
        if f.is_bijective():
            return f
    return None


def matrix_is_invertible(A, m: int) -> bool:
    A = np.asarray(A, dtype=np.int64) % m
    if A.shape[0] != A.shape[1]:
        return False
    if A.shape[0] == 0:
        return True
    return span_order(howell_form(A, m), m) == m ** A.shape[0]


def matrix_inverse(A, m: int) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64) % m
    n = A.shape[0]
    X = solve_many(A, np.eye(n, dtype=np.int64), m)
    if X is None or not matrix_is_invertible(A, m):
        raise LinalgError("matrix is not invertible")
    return X


def matpow(A: np.ndarray, k: int, m: int) -> np.ndarray:
    R = np.eye(A.shape[0], dtype=np.int64)
    B = A % m
    while k:
        if k & 1:
            R = R @ B % m
        B = B @ B % m
        k >>= 1
    return R


def mat_product(mats, n: int, m: int) -> np.ndarray:
    return reduce(lambda a, b: a @ b % m, mats, np.eye(n, dtype=np.int64))
