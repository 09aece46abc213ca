from fractions import Fraction

import numpy as np
import pytest

from hkcoeff import building as B
from hkcoeff import coeff as cf
from hkcoeff.samplers import random_hmodule
from hkcoeff.weyl import GroupData, simple

CONFIGS = [("sl2", 2, 2), ("sl2", 3, 9), ("pgl2", 2, 4), ("pgl2", 3, 3), ("sl2", 2, 3)]


def modules(kind, q, m, n, seed=0):
    gd = GroupData(kind, q)
    rng = np.random.default_rng([seed, q, m])
    return [random_hmodule(gd, m, rng) for _ in range(n)]


@pytest.mark.parametrize("kind", ["sl2", "pgl2"])
@pytest.mark.parametrize("q", [2, 3])
def test_constant_system_transitions(kind, q):
    m = 9
    gd = GroupData(kind, q)
    S = cf.spread(cf.constant_diagram(gd, m), B.build_region("apartment", gd, 3))
    A = cf.ApartmentSystem(S)
    assert all(A.standard.values())
    for (D, v), t in A.t.items():
        count = A.t_full[(D, v)][1]
        # one coset where the vertex is "behind" the chamber, q otherwise
        assert count == (1 if A.closest(v) == D else q)
        assert int(t.mat[0, 0]) == count % m
    assert A.check_plain_restriction()
    assert cf.check_category_C(S).ok


@pytest.mark.parametrize("kind,q,m", CONFIGS)
def test_restriction_to_chamber_recovers_diagram(kind, q, m):
    for M in modules(kind, q, m, 3):
        D = cf.diagram_from_hecke_module(M)
        S = cf.fm_system(M, B.build_region("tree", M.gd, 2))
        R = S.restrict_to_chamber()
        for x in ("x0", "x1"):
            assert np.array_equal(R.res[x].mat % m, D.res[x].mat % m)
        assert R.compatibility_witness() is None


def elements(gd):
    p = gd.q
    out = [B.n_s0(p), B.n_s1(p), B.upper(p, 1), B.lower(p, p), B.upper(p, Fraction(1, p)), B.lower(p, 1)]
    if gd.kind == "pgl2":
        out += [B.omega(p), B.eta(p)]
    else:
        out.append(B.mat(p, Fraction(1, p), 0, 0, p))
    return out


@pytest.mark.parametrize("kind,q,m", [("sl2", 2, 4), ("sl2", 3, 3), ("pgl2", 2, 2), ("pgl2", 3, 9)])
def test_action_is_a_cocycle_and_commutes_with_restriction(kind, q, m):
    M = modules(kind, q, m, 1, seed=7)[0]
    gd = M.gd
    S = cf.fm_system(M, B.build_region("tree", gd, 3))
    reg = S.region
    els = elements(gd)
    checked = 0
    for F in [f.id for f in reg.faces if f.dist <= 1]:
        for g in els:
            for h in els:
                a = S.c_map(h, F)
                if a is None:
                    continue
                hF, Xh, sh = a
                b = S.c_map(g, hF)
                c = S.c_map(g @ h, F)
                if b is None or c is None:
                    continue
                ghF, Xg, sg = b
                assert c[0] == ghF
                assert np.array_equal(Xh @ Xg % m, c[1] % m) or not S.carrier(ghF).reduce((Xh @ Xg - c[1]) % m).any()
                assert sh * sg == c[2]
                checked += 1
        fF = reg.faces[F]
        if fF.dim == 1:
            for g in els:
                a = S.c_map(g, F)
                if a is None:
                    continue
                gF, XD, _ = a
                for v in fF.verts:
                    b = S.c_map(g, v)
                    if b is None:
                        continue
                    gv, Xv, _ = b
                    assert gv in reg.faces[gF].verts
                    lhs = XD @ S.restriction(gF, gv) % m
                    rhs = S.restriction(F, v) @ Xv % m
                    assert not S.carrier(gv).reduce((lhs - rhs) % m).any()
    assert checked > 20


@pytest.mark.parametrize("kind,q,m", CONFIGS)
def test_random_modules_are_in_category_C(kind, q, m):
    for M in modules(kind, q, m, 4, seed=1):
        S = cf.fm_system(M, B.build_region("apartment", M.gd, 3))
        assert cf.check_category_C(S).ok
        A = cf.ApartmentSystem(S)
        assert A.check_plain_restriction()
        assert all(t.square_commutes for t in cf.tau_gamma_checks(A))


@pytest.mark.parametrize("kind", ["sl2", "pgl2"])
def test_p_invertible_transitions_are_bijective(kind):
    for M in modules(kind, 2, 3, 5, seed=3):
        A = cf.apartment_system(cf.fm_system(M, B.build_region("apartment", M.gd, 3)))
        assert all(t.is_bijective() for t in A.t.values())
        taus = cf.tau_gamma_checks(A)
        assert taus and all(t.unit and t.bijective for t in taus)


def test_p_nilpotent_tau_is_not_a_unit():
    gd = GroupData("sl2", 3)
    S = cf.spread(cf.constant_diagram(gd, 9), B.build_region("apartment", gd, 2))
    taus = cf.tau_gamma_checks(cf.ApartmentSystem(S))
    assert taus and not any(t.unit for t in taus)


def test_zero_diagram():
    gd = GroupData("pgl2", 3)
    D = cf.zero_diagram(gd, 9)
    assert D.is_zero()
    S = cf.spread(D, B.build_region("apartment", gd, 2))
    assert cf.check_category_C(S).ok


def test_gl2_is_rejected():
    gd = GroupData("gl2", 2)
    with pytest.raises((cf.CoeffError, B.RegionError)):
        cf.constant_diagram(gd, 2)


@pytest.mark.parametrize("kind", ["sl2", "pgl2"])
def test_twisted_restriction_is_rejected(kind):
    # precomposing r^C_x0 with the image of s0 breaks B-equivariance
    gd = GroupData(kind, 3)
    M = random_hmodule(gd, 9, np.random.default_rng(5))
    D = cf.diagram_from_hecke_module(M)
    V, r = D.reps["x0"], D.res["x0"]
    g = V.G.weyl_image(simple(gd, 0))
    D.res["x0"] = type(r)(r.dom, r.cod, r.mat @ V.row_op(g) % 9)
    assert "not equivariant" in D.compatibility_witness()
    with pytest.raises(cf.CoeffError):
        D.validate()


def test_json_shape():
    gd = GroupData("sl2", 2)
    S = cf.spread(cf.constant_diagram(gd, 2), B.build_region("apartment", gd, 1))
    js = S.to_json()
    assert js["region"]["chambers"] == 3
    assert len(js["faces"]) == 7
