"""Rank-one extended Weyl groups W~ = (T0/T1) x| (W_aff x| Omega).

Elements are kept in the normal form ``t * n_{i1} n_{i2} ... * omega^k`` where
``t`` lies in T0/T1, the word alternates between s0 and s1, and the n's are
the fixed matrix lifts

    n_s0 = [[0, 1], [-1, 0]],  n_s1 = [[0, -1/pi], [pi, 0]],  omega = [[0, 1], [pi, 0]].

The torus T0/T1 is identified with the F_q-points of the diagonal torus and
written additively through discrete logarithms to a fixed primitive root.
Every table (squares, conjugations, coroots) is computed from the lifts by
reducing diagonal matrices mod p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

KINDS = ("sl2", "pgl2", "gl2")
FACES = ("x0", "x1", "C")


class WeylError(ValueError):
    pass


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    phi = p - 1
    primes = [d for d in range(2, phi + 1) if phi % d == 0 and is_prime(d)]
    for g in range(2, p):
        if all(pow(g, phi // d, p) != 1 for d in primes):
            return g
    raise WeylError(f"no primitive root mod {p}")


def normalize_kind(kind: str) -> str:
    k = str(kind).lower().replace("_", "")
    if k not in KINDS:
        raise WeylError(f"unknown group kind {kind!r}")
    return k


@dataclass(frozen=True)
class GroupData:
    """Root datum tables for SL2, PGL2 or GL2 over a p-adic field with q = p."""

    kind: str
    q: int

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not is_prime(self.q):
            raise WeylError(f"q = {self.q} is not prime")
        self._validate()

    # torus as exponent vectors ------------------------------------------
    @cached_property
    def gen(self) -> int:
        return primitive_root(self.q)

    @cached_property
    def torus_orders(self) -> tuple[int, ...]:
        n = self.q - 1
        return (n, n) if self.kind == "gl2" else (n,)

    @cached_property
    def torus_size(self) -> int:
        return int(np.prod(self.torus_orders))

    @cached_property
    def torus_elements(self) -> list[tuple[int, ...]]:
        return [tuple(e) for e in product(*(range(n) for n in self.torus_orders))]

    @property
    def identity_torus(self) -> tuple[int, ...]:
        return tuple(0 for _ in self.torus_orders)

    @cached_property
    def _dlog(self) -> dict[int, int]:
        p, g = self.q, self.gen
        return {pow(g, k, p): k for k in range(p - 1)}

    def t_add(self, a, b) -> tuple[int, ...]:
        return tuple((x + y) % n for x, y, n in zip(a, b, self.torus_orders))

    def t_neg(self, a) -> tuple[int, ...]:
        return tuple((-x) % n for x, n in zip(a, self.torus_orders))

    def torus_diag(self, t) -> tuple[int, int]:
        """Diagonal entries mod p of the Teichmueller representative of t."""
        p, g = self.q, self.gen
        if self.kind == "sl2":
            return pow(g, t[0], p), pow(g, -t[0] % (p - 1), p)
        if self.kind == "pgl2":
            return pow(g, t[0], p), 1
        return pow(g, t[0], p), pow(g, t[1], p)

    def torus_class(self, a: int, b: int) -> tuple[int, ...]:
        """Class in T0/T1 of diag(a, b) (entries mod p, a unit diagonal in G)."""
        a %= self.q
        b %= self.q
        if self.kind == "sl2":
            if a * b % self.q != 1:
                raise WeylError("not in SL2")
            return (self._dlog[a],)
        if self.kind == "pgl2":
            return (self._dlog[a * pow(b, -1, self.q) % self.q],)
        return (self._dlog[a], self._dlog[b])

    # tables derived from the matrix lifts --------------------------------
    def _conj_diag(self, M, t) -> tuple[int, ...]:
        p = self.q
        a, b = self.torus_diag(t)
        D = np.array([[a, 0], [0, b]])
        Minv = np.array([[M[1][1], -M[0][1]], [-M[1][0], M[0][0]]]) * pow(int(round(M[0][0] * M[1][1] - M[0][1] * M[1][0])) % p, -1, p)
        C = (np.array(M) @ D @ Minv) % p
        if C[0, 1] or C[1, 0]:
            raise WeylError("lift does not normalize the torus")
        return self.torus_class(int(C[0, 0]), int(C[1, 1]))

    @cached_property
    def s_conj(self) -> dict[tuple, tuple]:
        """t -> n_s t n_s^-1 (the same for s0 and s1: both swap the diagonal)."""
        n0 = [[0, 1], [-1, 0]]
        return {t: self._conj_diag(n0, t) for t in self.torus_elements}

    @cached_property
    def omega_conj(self) -> dict[tuple, tuple]:
        # omega = J diag(pi, 1); the diagonal factor commutes with T
        J = [[0, 1], [1, 0]]
        return {t: self._conj_diag(J, t) for t in self.torus_elements}

    @cached_property
    def square(self) -> tuple[int, ...]:
        """Class of n_s^2 = -I in T0/T1 (same for both simple reflections)."""
        return self.torus_class(-1, -1)

    def coroot(self, k: int) -> tuple[int, ...]:
        """Class of diag(x, 1/x) for x = gen^k."""
        p, g = self.q, self.gen
        x = pow(g, k, p)
        return self.torus_class(x, pow(x, -1, p))

    @cached_property
    def theta_support(self) -> list[tuple[int, ...]]:
        """The multiset {h_s(x) : x in F_q^x} entering theta_s."""
        return [self.coroot(k) for k in range(self.q - 1)]

    @property
    def omega_order(self) -> int:
        """1 for SL2 (trivial), 2 for PGL2, 0 for GL2 (infinite cyclic)."""
        return {"sl2": 1, "pgl2": 2, "gl2": 0}[self.kind]

    @property
    def omega_finite(self) -> bool:
        return self.kind != "gl2"

    def norm_omega(self, k: int) -> int:
        o = self.omega_order
        return k % o if o else k

    def _validate(self):
        els = self.torus_elements
        for conj in (self.s_conj, self.omega_conj):
            if sorted(conj.values()) != sorted(els):
                raise WeylError("conjugation is not a bijection of T0/T1")
            for a in els:
                if conj[conj[a]] != a:
                    raise WeylError("conjugation is not an involution")
                for b in els:
                    if conj[self.t_add(a, b)] != self.t_add(conj[a], conj[b]):
                        raise WeylError("conjugation is not a homomorphism")
        if self.s_conj[self.square] != self.square:
            raise WeylError("square of n_s is not fixed by s")

    def to_json(self) -> dict:
        return {"kind": self.kind, "q": self.q}

    def __repr__(self) -> str:
        return f"GroupData({self.kind}, q={self.q})"


@dataclass(frozen=True, order=True)
class WeylElt:
    """t * (alternating word) * omega^k with the torus part on the left."""

    t: tuple[int, ...]
    first: int = 0
    length: int = 0
    omega: int = 0

    def __post_init__(self):
        if self.length == 0 and self.first != 0:
            object.__setattr__(self, "first", 0)

    @property
    def letters(self) -> list[int]:
        return [(self.first + i) % 2 for i in range(self.length)]

    @property
    def last(self) -> int | None:
        return (self.first + self.length - 1) % 2 if self.length else None

    def to_json(self) -> dict:
        return {"t": list(self.t), "word": {"first": f"s{self.first}", "len": self.length}, "omega": self.omega}

    @classmethod
    def from_json(cls, d: dict) -> "WeylElt":
        w = d.get("word", {"first": "s0", "len": 0})
        return cls(tuple(d["t"]), int(str(w["first"])[-1]), int(w["len"]), int(d.get("omega", 0)))

    def label(self) -> str:
        parts = []
        if any(self.t):
            parts.append("t" + ",".join(map(str, self.t)))
        parts += [f"s{i}" for i in self.letters]
        if self.omega:
            parts.append(f"w^{self.omega}")
        return "*".join(parts) or "1"


def identity(gd: GroupData) -> WeylElt:
    return WeylElt(gd.identity_torus)


def torus_elt(gd: GroupData, t) -> WeylElt:
    return WeylElt(tuple(t))


def simple(gd: GroupData, i: int) -> WeylElt:
    return WeylElt(gd.identity_torus, i, 1)


def omega_elt(gd: GroupData, k: int = 1) -> WeylElt:
    if gd.kind == "sl2" and k:
        raise WeylError("Omega is trivial for SL2")
    return WeylElt(gd.identity_torus, 0, 0, gd.norm_omega(k))


def word_elt(gd: GroupData, letters, t=None, omega: int = 0) -> WeylElt:
    """Product t * n_{l1} ... n_{lk} * omega^k of arbitrary letters."""
    out = torus_elt(gd, t if t is not None else gd.identity_torus)
    for i in letters:
        out = multiply(gd, out, simple(gd, i))
    if omega:
        out = multiply(gd, out, omega_elt(gd, omega))
    return out


def _conj_by_word(gd: GroupData, t, length: int):
    return gd.s_conj[t] if length % 2 else t


def _conj_by_omega(gd: GroupData, t, k: int):
    return gd.omega_conj[t] if k % 2 else t


def multiply(gd: GroupData, a: WeylElt, b: WeylElt) -> WeylElt:
    # move omega^{a.omega} past b.t and b.word
    tb = _conj_by_omega(gd, b.t, a.omega)
    bfirst = (b.first + a.omega) % 2 if a.omega % 2 else b.first
    # move a.word past tb
    t = gd.t_add(a.t, _conj_by_word(gd, tb, a.length))
    # concatenate words, cancelling n_i n_i = square (central)
    la, lb = a.length, b.length
    cancel = 0
    if la and lb and a.last == bfirst:
        cancel = min(la, lb)
    for _ in range(cancel):
        t = gd.t_add(t, gd.square)
    ra, rb = la - cancel, lb - cancel
    if ra:
        first, length = a.first, ra + rb
    elif rb:
        first, length = (bfirst + cancel) % 2, rb
    else:
        first, length = 0, 0
    return WeylElt(t, first, length, gd.norm_omega(a.omega + b.omega))


def inverse(gd: GroupData, a: WeylElt) -> WeylElt:
    out = omega_elt(gd, -a.omega) if a.omega else identity(gd)
    inv_square = gd.t_neg(gd.square)
    for i in reversed(a.letters):
        out = multiply(gd, out, WeylElt(inv_square, i, 1))
    return multiply(gd, out, WeylElt(gd.t_neg(a.t)))


def length(a: WeylElt) -> int:
    return a.length


def is_length_additive(gd: GroupData, d: WeylElt, w: WeylElt) -> bool:
    return multiply(gd, d, w).length == d.length + w.length


def face_generators(F: str) -> tuple[int, ...]:
    if F == "x0":
        return (0,)
    if F == "x1":
        return (1,)
    if F == "C":
        return ()
    raise WeylError(f"unknown face {F!r}")


def omegas(gd: GroupData, window=(0,)) -> list[int]:
    if gd.kind == "sl2":
        return [0]
    if gd.kind == "pgl2":
        return [0, 1]
    return list(window)


def enum_elements(gd: GroupData, maxlen: int, omega_window=(0,)) -> list[WeylElt]:
    out = []
    for k in omegas(gd, omega_window):
        for t in gd.torus_elements:
            out.append(WeylElt(t, 0, 0, k))
            for L in range(1, maxlen + 1):
                for f in (0, 1):
                    out.append(WeylElt(t, f, L, k))
    return out


def in_DF(gd: GroupData, F: str, d: WeylElt) -> bool:
    """d has minimal length in d*W_F."""
    return all(multiply(gd, d, simple(gd, i)).length > d.length for i in face_generators(F))


def enum_DF(gd: GroupData, F: str, maxlen: int, omega_window=(0,)) -> list[WeylElt]:
    if maxlen < 0:
        raise WeylError("maxlen must be non-negative")
    face_generators(F)
    return [d for d in enum_elements(gd, maxlen, omega_window) if in_DF(gd, F, d)]


def parahoric_basis(gd: GroupData, F: str, dagger: bool = False) -> list[WeylElt]:
    """W~_F (or W~_F^dagger) as a list of normal forms."""
    gens = face_generators(F)
    if dagger and gd.kind == "gl2":
        raise WeylError("dagger algebras are not supported for GL2 (Omega_F is infinite)")
    out = [WeylElt(t) for t in gd.torus_elements]
    for i in gens:
        out += [WeylElt(t, i, 1) for t in gd.torus_elements]
    if dagger and F == "C" and gd.kind == "pgl2":
        out += [WeylElt(t, 0, 0, 1) for t in gd.torus_elements]
    return out


def factor_DF(gd: GroupData, F: str, w: WeylElt) -> tuple[WeylElt, WeylElt]:
    """Write w = d * w_F with d in D~_F and w_F in W~_F (torus part put in w_F)."""
    basis = parahoric_basis(gd, F)
    hits = []
    for wf in basis:
        d = multiply(gd, w, inverse(gd, wf))
        if in_DF(gd, F, d) and not any(d.t):
            hits.append((d, wf))
    if len(hits) != 1:
        raise WeylError(f"factorization of {w.label()} is not unique ({len(hits)} candidates)")
    return hits[0]


def random_element(gd: GroupData, rng, maxlen: int = 6, omega_range: int = 3) -> WeylElt:
    t = tuple(int(rng.integers(0, n)) for n in gd.torus_orders)
    L = int(rng.integers(0, maxlen + 1))
    f = int(rng.integers(0, 2)) if L else 0
    if gd.kind == "sl2":
        k = 0
    elif gd.kind == "pgl2":
        k = int(rng.integers(0, 2))
    else:
        k = int(rng.integers(-omega_range, omega_range + 1))
    return WeylElt(t, f, L, k)


def make_group_data(kind: str, q: int) -> GroupData:
    return GroupData(kind, q)
