"""Extended affine Weyl group arithmetic against a monomial-matrix model.

Elements of N(T)/T1 are realised as 2x2 monomial matrices with entries
u * p^k; the key of a matrix records the permutation, the exponents and the
units mod p (projectively for PGL2).  Lengths are read off from the action
on apartment vertices.
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkcoeff import weyl as W
from hkcoeff.weyl import GroupData, WeylElt

CONFIGS = [(k, q) for k in ("sl2", "pgl2", "gl2") for q in (2, 3, 5)]


def mono(gd, w: WeylElt):
    p = gd.q
    a, d = gd.torus_diag(w.t)
    g = [[Fraction(a), Fraction(0)], [Fraction(0), Fraction(d)]]
    lifts = {
        0: [[0, 1], [-1, 0]],
        1: [[0, Fraction(-1, p)], [p, 0]],
    }
    om = [[0, 1], [p, 0]]
    om_inv = [[0, Fraction(1, p)], [1, 0]]

    def mul(x, y):
        return [[sum(Fraction(x[i][k]) * y[k][j] for k in range(2)) for j in range(2)] for i in range(2)]

    for i in w.letters:
        g = mul(g, lifts[i])
    for _ in range(abs(w.omega)):
        g = mul(g, om if w.omega > 0 else om_inv)
    return g


def _val(x: Fraction, p):
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, num * pow(den, -1, p) % p


def key(gd, g):
    p = gd.q
    entries = []
    for i in range(2):
        for j in range(2):
            entries.append((i, j, *_val(g[i][j], p)) if g[i][j] else None)
    nz = [e for e in entries if e]
    if gd.kind == "pgl2":
        _, _, v0, u0 = nz[0]
        inv = pow(u0, -1, p)
        nz = [(i, j, v - v0, u * inv % p) for i, j, v, u in nz]
    return tuple(nz)


def mono_length(gd, g):
    """Gallery distance from C = (0, 1) to g C in the apartment."""
    p = gd.q

    def vertex(k):
        if g[0][1] == 0:  # diagonal
            a, _ = _val(g[0][0], p)
            d, _ = _val(g[1][1], p)
            return k - a + d
        b, _ = _val(g[0][1], p)
        c, _ = _val(g[1][0], p)
        return c - k - b

    j = min(vertex(0), vertex(1))
    assert abs(vertex(0) - vertex(1)) == 1
    return abs(j)


def elements(gd, rng, n=30, maxlen=6):
    return [W.random_element(gd, rng, maxlen) for _ in range(n)]


@pytest.mark.parametrize("kind,q", CONFIGS)
def test_multiply_matches_matrices(kind, q):
    gd = GroupData(kind, q)
    rng = np.random.default_rng(q)
    for a, b in zip(elements(gd, rng), elements(gd, rng)):
        lhs = key(gd, mono(gd, W.multiply(gd, a, b)))
        g1, g2 = mono(gd, a), mono(gd, b)
        prod = [[sum(g1[i][k] * g2[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
        assert lhs == key(gd, prod)


@pytest.mark.parametrize("kind,q", CONFIGS)
def test_length_matches_apartment(kind, q):
    gd = GroupData(kind, q)
    rng = np.random.default_rng(10 + q)
    for w in elements(gd, rng, 40, 8):
        assert W.length(w) == mono_length(gd, mono(gd, w))


@pytest.mark.parametrize("kind,q", CONFIGS)
def test_inverse_and_identity(kind, q):
    gd = GroupData(kind, q)
    e = W.identity(gd)
    for w in elements(gd, np.random.default_rng(q + 7)):
        assert W.multiply(gd, w, W.inverse(gd, w)) == e
        assert W.multiply(gd, W.inverse(gd, w), w) == e
        assert W.multiply(gd, e, w) == w


@given(st.sampled_from(CONFIGS), st.integers(0, 2**32 - 1))
def test_associativity(cfg, seed):
    gd = GroupData(*cfg)
    a, b, c = elements(gd, np.random.default_rng(seed), 3)
    assert W.multiply(gd, W.multiply(gd, a, b), c) == W.multiply(gd, a, W.multiply(gd, b, c))


@pytest.mark.parametrize("kind,q", [("sl2", 3), ("pgl2", 2), ("gl2", 3)])
@pytest.mark.parametrize("F", ["x0", "x1", "C"])
def test_DF_against_length_oracle(kind, q, F):
    gd = GroupData(kind, q)
    gens = W.face_generators(F)
    maxlen = 4
    enum = set(W.enum_DF(gd, F, maxlen))
    brute = set()
    for w in W.enum_elements(gd, maxlen):
        L = mono_length(gd, mono(gd, w))
        ok = all(mono_length(gd, mono(gd, W.multiply(gd, w, W.simple(gd, i)))) > L for i in gens)
        if ok:
            brute.add(w)
    assert enum == brute


@pytest.mark.parametrize("kind,q", [("sl2", 3), ("pgl2", 3)])
@pytest.mark.parametrize("F", ["x0", "x1"])
def test_factor_DF_unique(kind, q, F):
    gd = GroupData(kind, q)
    for w in elements(gd, np.random.default_rng(4), 20):
        d, wf = W.factor_DF(gd, F, w)
        assert W.multiply(gd, d, wf) == w
        assert W.in_DF(gd, F, d)
        assert W.length(w) == W.length(d) + W.length(wf)


@pytest.mark.parametrize("kind,q", CONFIGS)
def test_parahoric_basis_sizes(kind, q):
    gd = GroupData(kind, q)
    T = gd.torus_size
    assert len(W.parahoric_basis(gd, "C")) == T
    assert len(W.parahoric_basis(gd, "x0")) == 2 * T
    if kind == "pgl2":
        assert len(W.parahoric_basis(gd, "C", dagger=True)) == 2 * T
    if kind == "gl2":
        with pytest.raises(W.WeylError):
            W.parahoric_basis(gd, "C", dagger=True)


def test_torus_orders():
    assert GroupData("sl2", 5).torus_size == 4
    assert GroupData("pgl2", 5).torus_size == 4
    assert GroupData("gl2", 5).torus_size == 16
    assert GroupData("sl2", 2).torus_size == 1


def test_unknown_kind():
    with pytest.raises(W.WeylError):
        W.normalize_kind("so3")
