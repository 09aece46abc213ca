import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkcoeff import hecke as H
from hkcoeff.parahoric import finite_quotient
from hkcoeff.ring_linalg import PresentedModule
from hkcoeff.samplers import random_hmodule
from hkcoeff.weyl import GroupData, WeylElt, identity, omega_elt, random_element, simple

KINDS = ("sl2", "pgl2", "gl2")
FACE_CASES = [
    (kind, q, F, dagger)
    for kind in KINDS
    for q in (2, 3)
    for F in ("x0", "x1", "C")
    for dagger in ((False, True) if F == "C" and kind == "pgl2" else (False,))
]


def convolution_table(gd, F, dagger, basis):
    """Structure constants of U-biinvariant functions on the finite quotient,
    with basis the characteristic functions of U w U."""
    G = finite_quotient(gd, F, dagger)
    U = G.subgroup("I")
    reps = [G.weyl_image(w) for w in basis]
    chars = []
    for g in reps:
        f = np.zeros(G.order, dtype=np.int64)
        f[sorted({int(G.mul[G.mul[u, g], v]) for u in U for v in U})] = 1
        chars.append(f)
    n = len(basis)
    T = np.zeros((n, n, n), dtype=np.int64)
    for i, f1 in enumerate(chars):
        for j, f2 in enumerate(chars):
            h = np.zeros(G.order, dtype=np.int64)
            for x in np.flatnonzero(f1):
                for y in np.flatnonzero(f2):
                    h[G.mul[x, y]] += 1
            assert not (h % len(U)).any()
            h //= len(U)
            T[i, j] = h[reps]
    return T


@pytest.mark.parametrize("kind,q,F,dagger", FACE_CASES)
def test_parahoric_tables_match_convolution(kind, q, F, dagger):
    gd = GroupData(kind, q)
    big = 10**6
    A = H.parahoric_algebra(gd, big, F, dagger)
    assert np.array_equal(convolution_table(gd, F, dagger, A.basis) % big, A.table)


@given(st.sampled_from(KINDS), st.sampled_from([2, 3]), st.sampled_from([2, 3, 4, 9]), st.integers(0, 2**32 - 1))
def test_associativity(kind, q, m, seed):
    gd = GroupData(kind, q)
    rng = np.random.default_rng(seed)
    a, b, c = (H.tau(gd, m, random_element(gd, rng)) for _ in range(3))
    assert ((a * b) * c - a * (b * c)).is_zero()


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("q", [2, 3, 5])
def test_quadratic_relation(kind, q):
    gd = GroupData(kind, q)
    m = 10**6
    for i in (0, 1):
        s = H.tau(gd, m, simple(gd, i))
        lhs = s * s
        rhs = H.tau(gd, m, WeylElt(gd.square), q) + s * H.theta_element(gd, m, i)
        assert (lhs - rhs).is_zero()


def test_theta_counts():
    # theta_s has q - 1 terms counted with multiplicity
    for kind in KINDS:
        for q in (2, 3, 5):
            gd = GroupData(kind, q)
            th = H.theta_element(gd, 10**6, 0)
            assert sum(c for _, c in th.coeffs) == q - 1


def test_ranks():
    assert H.parahoric_algebra(GroupData("sl2", 3), 9, "C").rank == 2
    assert H.parahoric_algebra(GroupData("sl2", 3), 9, "x0").rank == 4
    A = H.parahoric_algebra(GroupData("pgl2", 2), 2, "C", dagger=True)
    assert A.rank == 2
    gd = GroupData("pgl2", 2)
    w = H.tau(gd, 2, omega_elt(gd, 1))
    assert (w * w - H.one(gd, 2)).is_zero()


def test_tau_s_unit_when_p_invertible():
    gd = GroupData("sl2", 2)
    A = H.parahoric_algebra(gd, 3, "x0")
    e = np.zeros(A.rank, dtype=np.int64)
    e[A.basis.index(simple(gd, 0))] = 1
    assert A.is_unit(e)
    A2 = H.parahoric_algebra(gd, 2, "x0")
    e2 = np.zeros(A2.rank, dtype=np.int64)
    e2[A2.basis.index(simple(gd, 0))] = 1
    assert not A2.is_unit(e2)


@given(st.sampled_from(["sl2", "pgl2"]), st.sampled_from([(2, 2), (2, 4), (3, 3), (3, 9), (2, 3)]), st.integers(0, 2**32 - 1))
def test_random_modules_validate_and_roundtrip_json(kind, qm, seed):
    q, m = qm
    gd = GroupData(kind, q)
    M = random_hmodule(gd, m, np.random.default_rng(seed))
    M.validate()
    M2 = H.HModule.from_json(M.to_json())
    assert M2.carrier == M.carrier
    for X, Y in zip(M.row_ops(), M2.row_ops()):
        assert np.array_equal(X, Y)


def test_module_action_is_multiplicative():
    gd = GroupData("pgl2", 3)
    rng = np.random.default_rng(1)
    M = random_hmodule(gd, 9, rng)
    for _ in range(20):
        v, w = random_element(gd, rng, 4), random_element(gd, rng, 4)
        prod = H.tau(gd, 9, v) * H.tau(gd, 9, w)
        lhs = M.act_elt(prod)
        rhs = M.act(v) @ M.act(w) % 9
        assert not M.carrier.reduce(((lhs - rhs) % 9).T).any()


def test_relation_error_names_relation():
    gd = GroupData("sl2", 3)
    M = PresentedModule.free(3, 1)
    one = np.eye(1, dtype=np.int64)
    # trivial torus action: theta_s acts by q - 1 = 2, so tau_s = 1 breaks tau_s^2 = tau_s theta_s
    with pytest.raises(H.RelationError) as e:
        H.HModule(gd, M, [one, one], [one])
    assert "quadratic" in str(e.value)
    H.HModule(gd, M, [0 * one, 0 * one], [one])


def test_zero_module():
    for kind in ("sl2", "pgl2", "gl2"):
        Z = H.zero_module(GroupData(kind, 3), 3)
        assert Z.is_zero()


def test_sub_and_quotient_modules():
    gd = GroupData("sl2", 3)
    rng = np.random.default_rng(5)
    M = random_hmodule(gd, 3, rng, cut=False)
    v = np.ones((1, M.n), dtype=np.int64)
    S = H.sub_hmodule(M, v)
    Q = H.quotient_hmodule(M, v)
    assert S.carrier.order * Q.carrier.order == M.carrier.order
