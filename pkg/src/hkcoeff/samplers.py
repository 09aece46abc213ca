"""Seeded random generators of validated Hecke modules.

H-modules are assembled from torus characters: a character fixed by s gets a
1x1 block solving the quadratic relation, a pair {chi, s chi} gets an
antidiagonal 2x2 block.  The s0 and s1 blocks are conjugated independently by
matrices commuting with the torus, and the result is optionally cut down to a
random submodule or quotient so that carriers need not be free.
"""

from __future__ import annotations

import numpy as np

from . import ring_linalg as rl
from .hecke import AlgebraModule, FiniteAlgebra, HModule, quotient_hmodule, sub_hmodule
from .ring_linalg import PresentedModule
from .weyl import GroupData


def characters(gd: GroupData, m: int) -> list[dict]:
    """All characters T0/T1 -> (Z/m)^x, as dicts t -> value."""
    units = rl.RingZm(m).units()
    choices = [[u for u in units if pow(u, o, m) == 1] for o in gd.torus_orders]
    out = []

    def rec(c, vals):
        if c == len(choices):
            out.append({t: int(np.prod([pow(v, e, m) for v, e in zip(vals, t)])) % m for t in gd.torus_elements})
            return
        for u in choices[c]:
            rec(c + 1, vals + [u])

    rec(0, [])
    return out


def _twist(gd: GroupData, chi: dict, conj: dict) -> dict:
    return {t: chi[conj[t]] for t in chi}


def _key(chi: dict) -> tuple:
    return tuple(sorted(chi.items()))


def _theta(gd: GroupData, m: int, chi: dict) -> int:
    return sum(chi[h] for h in gd.theta_support) % m


def _fixed_solutions(gd, m, chi):
    th, c = _theta(gd, m, chi), gd.q * chi[gd.square] % m
    return [a for a in range(m) if (a * a - c - a * th) % m == 0]


def _pair_solutions(gd, m, chi, chi2):
    th1, th2, c = _theta(gd, m, chi), _theta(gd, m, chi2), gd.q * chi[gd.square] % m
    return [(a, b) for a in range(m) for b in range(m) if (a * b - c) % m == 0 and a * th1 % m == 0 and b * th2 % m == 0]


def _commuting_invertible(rng, m, labels):
    """Random invertible matrix, block diagonal with respect to equal labels."""
    n = len(labels)
    mask = np.array([[labels[i] == labels[j] for j in range(n)] for i in range(n)])
    for _ in range(200):
        P = rng.integers(0, m, (n, n)) * mask
        if rl.matrix_is_invertible(P, m):
            return P % m
    return np.eye(n, dtype=np.int64)


def _s_action(gd, m, rng, blocks):
    """Block matrix for tau_s given blocks [('fix', chi) | ('pair', chi, schi)]."""
    n = sum(1 if b[0] == "fix" else 2 for b in blocks)
    A = np.zeros((n, n), dtype=np.int64)
    i = 0
    for b in blocks:
        if b[0] == "fix":
            sols = _fixed_solutions(gd, m, b[1])
            A[i, i] = sols[rng.integers(len(sols))]
            i += 1
        else:
            sols = _pair_solutions(gd, m, b[1], b[2])
            a, c = sols[rng.integers(len(sols))]
            A[i + 1, i] = a
            A[i, i + 1] = c
            i += 2
    return A


def _omega_action(gd, m, rng, blocks):
    n = sum(1 if b[0] == "fix" else 2 for b in blocks)
    O = np.zeros((n, n), dtype=np.int64)
    inv = [u for u in rl.RingZm(m).units() if u * u % m == 1]
    i = 0
    for b in blocks:
        if b[0] == "fix":
            O[i, i] = inv[rng.integers(len(inv))]
            i += 1
        else:
            O[i, i + 1] = O[i + 1, i] = 1
            i += 2
    if gd.kind == "gl2":
        units = rl.RingZm(m).units()
        O = O * units[rng.integers(len(units))] % m
    return O


def _usable_blocks(gd, m):
    chars = characters(gd, m)
    out = []
    seen = set()
    for chi in chars:
        k = _key(chi)
        if k in seen:
            continue
        schi = _twist(gd, chi, gd.s_conj)
        if _key(schi) == k:
            seen.add(k)
            if _fixed_solutions(gd, m, chi):
                out.append(("fix", chi))
        else:
            seen.add(k)
            seen.add(_key(schi))
            if _pair_solutions(gd, m, chi, schi):
                out.append(("pair", chi, schi))
    return out


def random_hmodule(gd: GroupData, m: int, rng, max_rank: int = 3, cut: bool = True) -> HModule:
    usable = _usable_blocks(gd, m)
    target = int(rng.integers(1, max_rank + 1))
    blocks: list = []
    size = 0
    for _ in range(50):
        if size >= target:
            break
        b = usable[rng.integers(len(usable))]
        d = 1 if b[0] == "fix" else 2
        if size + d <= max(target, 2):
            blocks.append(b)
            size += d
    if not blocks:
        blocks = [b for b in usable if b[0] == "fix"][:1] or usable[:1]
    labels = []
    for b in blocks:
        labels += [_key(b[1])] if b[0] == "fix" else [_key(b[1]), _key(b[2])]
    n = len(labels)
    chis = []
    for b in blocks:
        chis += [b[1]] if b[0] == "fix" else [b[1], b[2]]
    ngen = len(gd.torus_orders)
    gens = [tuple(int(c == k) % o for k, o in enumerate(gd.torus_orders)) for c in range(ngen)]
    T = [np.diag([chi[g] for chi in chis]).astype(np.int64) for g in gens]

    def conj(A, P):
        return P @ A @ rl.matrix_inverse(P, m) % m

    A0 = conj(_s_action(gd, m, rng, blocks), _commuting_invertible(rng, m, labels))
    Om = None
    if gd.kind == "sl2":
        A1 = conj(_s_action(gd, m, rng, blocks), _commuting_invertible(rng, m, labels))
    else:
        O = conj(_omega_action(gd, m, rng, blocks), _commuting_invertible(rng, m, labels))
        Oinv = rl.matrix_inverse(O, m)
        A1 = O @ A0 @ Oinv % m
        Om = O
    M = HModule(gd, PresentedModule.free(m, n), [A0, A1], T, Om)
    if cut and n > 1:
        r = rng.random()
        v = rng.integers(0, m, (1, n))
        cutM = M
        if r < 0.25:
            cutM = sub_hmodule(M, v)
        elif r < 0.5:
            cutM = quotient_hmodule(M, v)
        # a cut that kills everything would waste the case
        if cutM.carrier.order > 1:
            M = cutM
    return M


def _close(ops, G, m, rel=None):
    G = rl.howell_form(G % m, m)
    while True:
        parts = [G] + [G @ X % m for X in ops] + ([rel] if rel is not None and rel.shape[0] else [])
        new = rl.howell_form(np.vstack(parts), m)
        if new.shape == G.shape and np.array_equal(new, G):
            return G
        G = new


def quotient_algebra_module(M: AlgebraModule, gens) -> AlgebraModule:
    G = _close(M.row_ops(), rl.as_rows(gens, M.carrier.n), M.carrier.m)
    Q, _ = rl.quotient(M.carrier, G)
    return AlgebraModule(M.algebra, Q, M.ops)


def sub_algebra_module(M: AlgebraModule, gens) -> tuple[AlgebraModule, rl.ModuleMap]:
    G = _close(M.row_ops(), rl.as_rows(gens, M.carrier.n), M.carrier.m, M.carrier.rel)
    S, incl = rl.submodule(M.carrier, G)
    return AlgebraModule(M.algebra, S, [rl.restrict_operator(incl, X.T).T for X in M.ops]), incl


def simplify_algebra_module(M: AlgebraModule) -> AlgebraModule:
    S, to, back = rl.simplify(M.carrier)
    if S.n == M.carrier.n:
        return M
    m = M.carrier.m
    return AlgebraModule(M.algebra, S, [(back.mat @ X.T @ to.mat % m).T for X in M.ops])


def random_hf_module(gd: GroupData, m: int, A: FiniteAlgebra, rng, max_rank: int = 3) -> AlgebraModule:
    """Either a restricted random H-module or a cyclic quotient of the regular module."""
    from .hecke import restrict_operators

    if rng.random() < 0.5:
        M = random_hmodule(gd, m, rng, max_rank)
        return AlgebraModule(A, M.carrier, restrict_operators(M, A))
    R = A.regular_module()
    k = int(rng.integers(1, 3))
    N = quotient_algebra_module(R, rng.integers(0, m, (k, A.rank)))
    if rng.random() < 0.3:
        N = sub_algebra_module(N, rng.integers(0, m, (1, A.rank)))[0]
    return simplify_algebra_module(N)

