
import numpy as np
import pytest

from hkcoeff import building as B
from hkcoeff import chains as ch
from hkcoeff import coeff as cf
from hkcoeff.samplers import random_hmodule
from hkcoeff.weyl import GroupData


def modules(kind, q, m, n, seed=0):
    gd = GroupData(kind, q)
    rng = np.random.default_rng([seed, q, m, 11])
    return [random_hmodule(gd, m, rng) for _ in range(n)]


@pytest.mark.parametrize("region", ["apartment", "tree", "halftree"])
@pytest.mark.parametrize("kind,q,m", [("sl2", 2, 4), ("pgl2", 3, 9), ("sl2", 2, 3)])
def test_constant_system_homology(region, kind, q, m):
    gd = GroupData(kind, q)
    S = cf.spread(cf.constant_diagram(gd, m), B.build_region(region, gd, 2))
    K = ch.chain_complex(S)
    assert ch.homology(K, 0).order == m
    assert ch.homology(K, 1).order == 1
    reg = S.region
    e = {reg.C: np.array([1])}
    assert {F: int(v[0]) % m for F, v in K.boundary(e).items()} == {reg.x0: 1, reg.x1: m - 1}


@pytest.mark.parametrize("region", ["apartment", "tree"])
@pytest.mark.parametrize("kind,q,m", [("sl2", 2, 2), ("pgl2", 2, 4), ("sl2", 3, 3)])
def test_euler_characteristic(region, kind, q, m):
    # |C0| / |C1| = |H0| / |H1| for a two-term complex of finite modules
    for M in modules(kind, q, m, 2):
        K = ch.chain_complex(cf.fm_system(M, B.build_region(region, M.gd, 2)))
        assert K.P0.order * ch.homology(K, 1).order == K.P1.order * ch.homology(K, 0).order


def test_boundary_matches_matrix():
    M = modules("pgl2", 3, 9, 1)[0]
    S = cf.fm_system(M, B.build_region("tree", M.gd, 2))
    K = ch.chain_complex(S)
    rng = np.random.default_rng(4)
    c = {D: rng.integers(0, 9, S.carrier(D).n) for D in S.region.chambers[:4]}
    via_matrix = K.chain(K.vector(c, 1) @ K.d0.mat % 9, 0)
    direct = K.boundary(c)
    for v in set(via_matrix) | set(direct):
        x = np.asarray(via_matrix.get(v, 0)) - np.asarray(direct.get(v, 0))
        assert not S.carrier(v).reduce(np.broadcast_to(x, (S.carrier(v).n,)) % 9).any()


@pytest.mark.parametrize("kind,q,m", [("sl2", 2, 2), ("sl2", 3, 9), ("pgl2", 2, 4), ("pgl2", 3, 3), ("sl2", 2, 3)])
def test_roundtrip(kind, q, m):
    for M in modules(kind, q, m, 3):
        ok, res = ch.roundtrip(M, 3)
        assert ok, res.report.to_json()
        names = {c.name for c in res.report.checks}
        assert {"H1_vanishes", "iota_x0_bijective", "iota_C_independent"} <= names


def test_different_modules_are_not_isomorphic():
    Ms = modules("sl2", 3, 9, 12, seed=2)
    a = Ms[0]
    b = next(M for M in Ms[1:] if M.carrier.order != a.carrier.order)
    _, res = ch.roundtrip(a, 3)
    assert not ch.modules_isomorphic(res.module, b)


@pytest.mark.parametrize("kind,q,m", [("sl2", 2, 2), ("pgl2", 3, 9)])
def test_rank_one_exactness(kind, q, m):
    for M in modules(kind, q, m, 2):
        assert ch.check_rank_one_exactness(M, 3).ok


def test_rank_one_needs_p_nilpotent():
    M = modules("sl2", 2, 3, 1)[0]
    with pytest.raises(ch.ChainError):
        ch.check_rank_one_exactness(M, 2)


@pytest.mark.parametrize("kind,q", [("sl2", 2), ("pgl2", 2), ("pgl2", 3)])
def test_etale_identity(kind, q):
    M = modules(kind, q, q, 1)[0]
    rep = ch.check_etale_identity(ch.halftree_system(M, M.gd, 3))
    assert rep.ok, rep.to_json()


def test_etale_identity_fails_without_all_cosets(monkeypatch):
    M = modules("pgl2", 3, 3, 1)[0]
    full = ch.unipotent_reps
    monkeypatch.setattr(ch, "unipotent_reps", lambda gd, t: full(gd, t)[:-1])
    S = ch.halftree_system(None, M.gd, 3, diagram=cf.constant_diagram(M.gd, 3))
    rep = ch.check_etale_identity(S)
    assert not rep.ok


def test_phi_is_multiplicative():
    gd = GroupData("pgl2", 2)
    M = modules("pgl2", 2, 4, 1)[0]
    S = ch.halftree_system(M, gd, 4)
    t = B.default_t(gd)
    inner = [f.id for f in S.region.faces if f.dist <= 1]
    for f in ch.basis_chains(S, inner):
        assert ch._chains_equal(S, ch.phi(S, t, ch.phi(S, t, f)), ch.phi(S, t @ t, f))
        assert ch._chains_equal(S, ch.psi(S, t, ch.phi(S, t, f)), f)
        u = B.lower(2, 2)
        assert ch._chains_equal(S, ch.phi(S, u, ch.phi(S, t, f)), ch.phi(S, u @ t, f))


def test_phi_commutes_with_boundary():
    gd = GroupData("sl2", 3)
    M = modules("sl2", 3, 3, 1)[0]
    S = ch.halftree_system(M, gd, 3)
    K = ch.chain_complex(S)
    t = B.default_t(gd)
    near = [D for D in S.region.chambers if S.region.faces[D].dist <= 0]
    for f in ch.basis_chains(S, near):
        assert ch._chains_equal(S, K.boundary(ch.phi(S, t, f)), ch.phi(S, t, K.boundary(f)))


@pytest.mark.parametrize("kind,q,m", [("sl2", 2, 2), ("pgl2", 3, 3)])
def test_halftree_h0(kind, q, m):
    for M in modules(kind, q, m, 2, seed=9):
        res = ch.halftree_h0(M, 3)
        assert res.report.ok, res.report.to_json()
