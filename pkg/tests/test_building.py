from collections import deque
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkcoeff import building as B
from hkcoeff.parahoric import finite_quotient
from hkcoeff.weyl import GroupData, simple


def graph_distances(R, start):
    adj = {v: [] for v in R.vertices}
    for D in R.chambers:
        s, t = R.faces[D].verts
        adj[s].append(t)
        adj[t].append(s)
    dist = {start: 0}
    todo = deque([start])
    while todo:
        v = todo.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                todo.append(w)
    return adj, dist


@pytest.mark.parametrize("kind", ["sl2", "pgl2"])
@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("region", ["apartment", "tree", "halftree"])
@pytest.mark.parametrize("N", [0, 1, 3])
def test_region_is_a_tree_of_expected_size(kind, q, region, N):
    R = B.build_region(region, GroupData(kind, q), N)
    assert len(R.chambers) == B.expected_chamber_count(region, q, N)
    assert len(R.vertices) == len(R.chambers) + 1
    adj, dist = graph_distances(R, R.x0)
    assert len(dist) == len(R.vertices)
    deg = 2 if region == "apartment" else q + 1
    assert all(len(a) <= deg for a in adj.values())
    # vertex distance from lattice keys agrees with graph distance
    assert all(R.vertex_distance(v) == dist[v] for v in R.vertices)


@pytest.mark.parametrize("q,N", [(2, 4), (3, 3)])
def test_tree_ball_sphere_sizes(q, N):
    R = B.build_region("tree", GroupData("sl2", q), N)
    _, dist = graph_distances(R, R.x0)
    counts = np.bincount(list(dist.values()))
    assert counts[0] == 1
    for k in range(1, N + 1):
        assert counts[k] == (q + 1) * q ** (k - 1)


@pytest.mark.parametrize("kind", ["sl2", "pgl2"])
def test_transports_send_faces_to_the_base_chamber(kind):
    R = B.build_region("tree", GroupData(kind, 3), 3)
    base = {"x0": R.x0, "x1": R.x1, "C": R.C}
    for f in R.faces:
        assert R.image(f.gamma, f.id) == base[f.label]


def same_class(M1, M2, p):
    """Lattice classes agree iff M1^-1 M2 is a scalar times a GL2(Z_p) matrix."""
    g = M1.inv() @ M2
    g = g.primitive()
    return B.val(g.det(), p) == 0


small = st.integers(-4, 4)


@given(st.lists(small, min_size=8, max_size=8), st.sampled_from([2, 3]))
def test_lattice_key_is_a_class_invariant(e, p):
    def m(xs):
        return B.mat(p, *[Fraction(x) * Fraction(p) ** (i % 2) for i, x in enumerate(xs)])

    M1, M2 = m(e[:4]), m(e[4:])
    if M1.det() == 0 or M2.det() == 0:
        return
    assert (B.lattice_key(M1) == B.lattice_key(M2)) == same_class(M1, M2, p)


def test_finite_images_of_simple_reflections():
    for kind in ("sl2", "pgl2"):
        gd = GroupData(kind, 3)
        for label, s, lift in (("x0", 0, B.n_s0(3)), ("x1", 1, B.n_s1(3))):
            G = finite_quotient(gd, label)
            img, cross = B.finite_image(gd, label, lift)
            assert not cross
            assert G.index[G.normalize(img)] == G.weyl_image(simple(gd, s))


def test_omega_at_the_chamber_is_J():
    gd = GroupData("pgl2", 3)
    img, _ = B.finite_image(gd, "C", B.omega(3))
    assert img == (0, 1, 1, 0)
    img, cross = B.finite_image(gd, "x0", B.omega(3))
    assert cross


def test_finite_image_rejects_non_stabilizers():
    gd = GroupData("sl2", 3)
    with pytest.raises(B.RegionError):
        B.finite_image(gd, "x0", B.mat(3, Fraction(1, 3), 0, 0, 3))
    with pytest.raises(B.RegionError):
        B.finite_image(gd, "C", B.n_s0(3))


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_iwahori_coset_reps_are_distinct(k):
    gd = GroupData("sl2", 3)
    R = B.build_region("tree", gd, 4)
    v = R.apartment_face(0, k)
    for D in (R.apartment_face(1, k - 1), R.apartment_face(1, k)):
        if D is None or v not in R.faces[D].verts:
            continue
        Dk = R.faces[D].apt
        reps = B.iwahori_coset_reps(gd, (0, k), (1, Dk))
        assert all(B.in_iwahori(r) for r in reps)
        images = [R.image(r, D) for r in reps]
        assert all(x is not None and v in R.faces[x].verts for x in images)
        assert len(set(images)) == len(reps)


def test_iwahori_generators_lie_in_iwahori():
    for kind in ("sl2", "pgl2"):
        gd = GroupData(kind, 3)
        for dim, k in ((0, 0), (0, 2), (1, -1), (1, 1)):
            for g in B.iwahori_generators(gd, dim, k):
                assert B.in_iwahori(g)


def test_precision_guard():
    with pytest.raises(B.PrecisionError):
        B.mat(2, Fraction(1, 2**5), 0, 0, 2**5).check_precision(4)
    with pytest.raises(B.PrecisionError):
        B.build_region("tree", GroupData("sl2", 2), 3, K=1)


def test_unknown_region_and_gl2():
    with pytest.raises(B.RegionError):
        B.build_region("ball", GroupData("sl2", 2), 1)
    with pytest.raises(B.RegionError):
        B.build_region("tree", GroupData("gl2", 2), 1)


def test_unipotent_reps_count():
    for kind, q in (("sl2", 2), ("pgl2", 3)):
        gd = GroupData(kind, q)
        assert len(B.unipotent_reps(gd, B.default_t(gd))) == q ** B.t_shift(gd)
