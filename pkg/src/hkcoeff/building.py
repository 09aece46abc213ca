"""Truncated regions of the rank-one Bruhat-Tits tree.

Group elements are 2x2 matrices with entries in Z[1/p], stored exactly as
fractions.  The precision bound K caps the p-adic valuations that transports
may reach; exceeding it raises PrecisionError so callers can raise K.

Vertices are homothety classes of lattices, keyed by a Hermite normal form
(a, b): the class of the lattice spanned by (p^a, 0) and (b, 1) with b reduced
modulo p^a.  x0 is the standard lattice and x1 = eta x0 with eta = diag(1, p).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .weyl import GroupData


class PrecisionError(ArithmeticError):
    pass


class RegionError(ValueError):
    pass


def default_precision(N: int) -> int:
    env = os.environ.get("HKCOEFF_PRECISION")
    return int(env) if env else N + 2


def val(x: Fraction, p: int) -> float:
    if x == 0:
        return float("inf")
    x = Fraction(x)
    v, n, d = 0, x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


class PadicMatrix:
    """2x2 matrix over Z[1/p]; ``e`` is the row-major 4-tuple of Fractions."""

    __slots__ = ("p", "e")

    def __init__(self, p: int, e):
        self.p = p
        self.e = tuple(Fraction(x) for x in e)

    @classmethod
    def identity(cls, p: int) -> "PadicMatrix":
        return cls(p, (1, 0, 0, 1))

    def __matmul__(self, o: "PadicMatrix") -> "PadicMatrix":
        a, b, c, d = self.e
        w, x, y, z = o.e
        return PadicMatrix(self.p, (a * w + b * y, a * x + b * z, c * w + d * y, c * x + d * z))

    def __eq__(self, o) -> bool:
        return isinstance(o, PadicMatrix) and self.e == o.e

    def __hash__(self) -> int:
        return hash(self.e)

    def det(self) -> Fraction:
        a, b, c, d = self.e
        return a * d - b * c

    def inv(self) -> "PadicMatrix":
        a, b, c, d = self.e
        D = self.det()
        if D == 0:
            raise ZeroDivisionError("singular matrix")
        return PadicMatrix(self.p, (d / D, -b / D, -c / D, a / D))

    def scale(self, k: int) -> "PadicMatrix":
        s = Fraction(self.p) ** k
        return PadicMatrix(self.p, tuple(x * s for x in self.e))

    def vals(self) -> tuple:
        return tuple(val(x, self.p) for x in self.e)

    def min_val(self) -> float:
        return min(self.vals())

    def primitive(self) -> "PadicMatrix":
        """Scalar multiple with minimal entry valuation 0 (used for PGL2)."""
        return self.scale(-int(self.min_val()))

    def check_precision(self, K: int) -> "PadicMatrix":
        for v in self.vals():
            if v != float("inf") and abs(v) > K:
                raise PrecisionError(f"valuation {v} exceeds precision K={K}")
        return self

    def reduce(self) -> tuple[int, int, int, int]:
        """Entries modulo p; requires integral entries."""
        out = []
        for x in self.e:
            if val(x, self.p) < 0:
                raise RegionError("matrix is not integral")
            out.append(x.numerator * pow(x.denominator, -1, self.p) % self.p)
        return tuple(out)

    def to_json(self) -> list[str]:
        return [str(x) for x in self.e]

    def __repr__(self) -> str:
        return "PadicMatrix(" + ", ".join(str(x) for x in self.e) + ")"


# ---------------------------------------------------------------------------
# standard elements


def mat(p: int, a, b, c, d) -> PadicMatrix:
    return PadicMatrix(p, (a, b, c, d))


def n_s0(p: int) -> PadicMatrix:
    return mat(p, 0, 1, -1, 0)


def n_s1(p: int) -> PadicMatrix:
    return mat(p, 0, Fraction(-1, p), p, 0)


def omega(p: int) -> PadicMatrix:
    return mat(p, 0, 1, p, 0)


def eta(p: int) -> PadicMatrix:
    return mat(p, 1, 0, 0, p)


def upper(p: int, x) -> PadicMatrix:
    return mat(p, 1, x, 0, 1)


def lower(p: int, x) -> PadicMatrix:
    return mat(p, 1, 0, x, 1)


def chart(p: int, label: str) -> PadicMatrix:
    """kappa_x with x = kappa_x x0."""
    return eta(p) if label == "x1" else PadicMatrix.identity(p)


def is_type_preserving(gd: GroupData, g: PadicMatrix) -> bool:
    return gd.kind == "sl2" or val(g.det(), gd.q) % 2 == 0


def default_t(gd: GroupData) -> PadicMatrix:
    """Strictly dominant element of T^+ (contracts the lower unipotent radical)."""
    p = gd.q
    if gd.kind == "sl2":
        return mat(p, Fraction(1, p), 0, 0, p)
    if gd.kind == "pgl2":
        return mat(p, 1, 0, 0, p)
    raise RegionError("half-tree operators are implemented for SL2 and PGL2")


def t_shift(gd: GroupData) -> int:
    """<alpha, nu(t)> for the default t."""
    return 2 if gd.kind == "sl2" else 1


def unipotent_reps(gd: GroupData, t: PadicMatrix) -> list[PadicMatrix]:
    """Lower unipotent representatives of Ubar_1 / t Ubar_1 t^-1."""
    p = gd.q
    a, _, _, d = t.e
    k = int(val(d / a, p))
    out = []
    for n in range(p**k):
        digits, x = [], n
        for _ in range(k):
            digits.append(x % p)
            x //= p
        out.append(lower(p, sum(dg * p ** (i + 1) for i, dg in enumerate(digits))))
    return out


# ---------------------------------------------------------------------------
# lattice classes


def _canon_mod(b: Fraction, a: int, p: int) -> Fraction:
    """Representative of b modulo p^a Z_p in [0, p^a) with p-power denominator."""
    if b == 0:
        return Fraction(0)
    e = max(0, -int(val(b, p)))
    if a + e <= 0:
        return Fraction(0)
    B = b * Fraction(p) ** e
    mod = p ** (a + e)
    r = B.numerator * pow(B.denominator, -1, mod) % mod
    return Fraction(r, p**e)


def lattice_key(B: PadicMatrix) -> tuple[int, Fraction]:
    """Normal form of the homothety class of the lattice spanned by the columns of B."""
    p = B.p
    a0, a1, b0, b1 = B.e
    cols = [(a0, b0), (a1, b1)]
    if val(cols[0][1], p) < val(cols[1][1], p):
        piv, oth = cols[0], cols[1]
    else:
        piv, oth = cols[1], cols[0]
    if piv[1] == 0:
        raise RegionError("degenerate lattice basis")
    f = oth[1] / piv[1]
    x = oth[0] - f * piv[0]
    if x == 0:
        raise RegionError("degenerate lattice basis")
    y = piv[1]
    vy, vx = int(val(y, p)), int(val(x, p))
    b = piv[0] * Fraction(p) ** vy / y
    a = vx - vy
    b = b / Fraction(p) ** vy
    return a, _canon_mod(b, a, p)


def key_distance(key, p: int) -> int:
    """Distance of a vertex class from x0."""
    a, b = key
    mu = min(a, int(val(b, p)) if b else 0, 0)
    return a - 2 * mu


def key_on_x1_side(key, p: int) -> bool:
    """True for x0 and for vertices whose geodesic to x0 passes through x1."""
    a, b = key
    mu = min(a, int(val(b, p)) if b else 0, 0)
    return (a - 2 * mu) == 0 or mu < 0


def apartment_coordinate(key) -> int | None:
    a, b = key
    return -a if b == 0 else None


def vertex_key(p: int, gamma: PadicMatrix, label: str) -> tuple:
    """Key of the vertex gamma^-1 [label]."""
    return lattice_key(gamma.inv() @ chart(p, label))


# ---------------------------------------------------------------------------
# regions


@dataclass
class Face:
    id: int
    dim: int  # 0 vertex, 1 chamber
    label: str  # 'x0', 'x1' or 'C'
    gamma: PadicMatrix  # gamma F = [F]
    key: tuple
    dist: int  # gallery distance of C(F) from C
    closest: int  # id of C(F)
    verts: tuple = ()  # chambers: (source, target); the source has label x0
    chambers: list = field(default_factory=list)
    apt: int | None = None


class Region:
    """Faces of a truncated apartment, tree ball or half-tree around C.

    Chambers are enumerated by breadth-first search: the chambers through the
    vertex gamma_D^-1 x of a chamber D are gamma_D^-1 h C with h = u(a) n_s0
    (x = x0) or h = ubar(p a) n_s1 (x = x1).  The transport of a vertex is the
    transport of the chamber that first reached it, which is its closest
    chamber C(F).
    """

    KINDS = ("apartment", "tree", "halftree")

    def __init__(self, kind: str, gd: GroupData, N: int, K: int | None = None):
        if kind not in self.KINDS:
            raise RegionError(f"unknown region kind {kind!r}")
        if N < 0:
            raise RegionError("radius must be non-negative")
        if gd.kind == "gl2":
            raise RegionError("regions are built for SL2 and PGL2")
        self.kind, self.gd, self.N = kind, gd, N
        self.K = K if K is not None else default_precision(N)
        self.p = p = gd.q
        self.faces: list[Face] = []
        self.index: dict = {}
        digits = [0] if kind == "apartment" else list(range(p))
        one = PadicMatrix.identity(p)
        C = self._add(1, "C", one, None, 0, None)
        x0 = self._add(0, "x0", one, vertex_key(p, one, "x0"), 0, C)
        x1 = self._add(0, "x1", one, vertex_key(p, one, "x1"), 0, C)
        self._attach(C, x0, x1)
        self.C, self.x0, self.x1 = C, x0, x1
        frontier = [(C, x) for x in ((x1,) if kind == "halftree" else (x0, x1))]
        for n in range(1, N + 1):
            nxt = []
            for D, v in frontier:
                gD = self.faces[D].gamma
                lab = self.faces[v].label
                for a in digits:
                    h = upper(p, a) @ n_s0(p) if lab == "x0" else lower(p, p * a) @ n_s1(p)
                    g = (h.inv() @ gD).check_precision(self.K)
                    keys = {x: vertex_key(p, g, x) for x in ("x0", "x1")}
                    if keys[lab] != self.faces[v].key:
                        raise RegionError("neighbour chamber does not contain the expansion vertex")
                    other = "x1" if lab == "x0" else "x0"
                    Dn = self._add(1, "C", g, None, n, None)
                    w = self._add(0, other, g, keys[other], n, Dn)
                    src, tgt = (v, w) if lab == "x0" else (w, v)
                    self._attach(Dn, src, tgt)
                    nxt.append((Dn, w))
            frontier = nxt
        self._finish()

    def _add(self, dim, label, gamma, key, dist, closest) -> int:
        i = len(self.faces)
        f = Face(i, dim, label, gamma, key, dist, i if closest is None else closest)
        if dim == 0:
            if key in self.index:
                raise RegionError("vertex enumerated twice")
            self.index[key] = i
            f.apt = apartment_coordinate(key)
        self.faces.append(f)
        return i

    def _attach(self, D, src, tgt):
        f = self.faces[D]
        f.verts = (src, tgt)
        f.key = ("C", self.faces[src].key, self.faces[tgt].key)
        self.index[f.key] = D
        a, b = self.faces[src].apt, self.faces[tgt].apt
        f.apt = min(a, b) if a is not None and b is not None else None
        self.faces[src].chambers.append(D)
        self.faces[tgt].chambers.append(D)

    def _finish(self):
        self.vertices = [f.id for f in self.faces if f.dim == 0]
        self.chambers = [f.id for f in self.faces if f.dim == 1]

    # lookup --------------------------------------------------------------
    def chamber_key(self, k0, k1) -> tuple:
        """Key of the chamber with the given vertex keys (in either order)."""
        a, b = (k0, k1)
        for s, t in ((a, b), (b, a)):
            key = ("C", s, t)
            if key in self.index:
                return key
        return ("C", a, b)

    def face_key_under(self, g: PadicMatrix, F: int) -> tuple:
        """Key of g F."""
        f = self.faces[F]
        if f.dim == 0:
            return lattice_key(g @ f.gamma.inv() @ chart(self.p, f.label))
        s, t = f.verts
        return self.chamber_key(self.face_key_under(g, s), self.face_key_under(g, t))

    def find(self, key) -> int | None:
        return self.index.get(key)

    def image(self, g: PadicMatrix, F: int) -> int | None:
        return self.find(self.face_key_under(g, F))

    def vertex_distance(self, v: int) -> int:
        return key_distance(self.faces[v].key, self.p)

    def apartment_face(self, dim: int, k: int) -> int | None:
        """Apartment vertex k or chamber (k, k+1)."""
        for f in self.faces:
            if f.dim == dim and f.apt == k and (dim == 0 or self.faces[f.verts[0]].apt is not None):
                return f.id
        return None

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "group": self.gd.to_json(),
            "radius": self.N,
            "precision": self.K,
            "vertices": len(self.vertices),
            "chambers": len(self.chambers),
        }

    def to_json(self) -> dict:
        out = self.summary()
        out["faces"] = [
            {
                "id": f.id,
                "dim": f.dim,
                "type": f.label,
                "transport": f.gamma.to_json(),
                "closest_chamber": f.closest,
                "distance": f.dist,
                "vertices": list(f.verts),
                "apartment": f.apt,
            }
            for f in self.faces
        ]
        return out


def build_region(kind: str, gd: GroupData, N: int, K: int | None = None) -> Region:
    return Region(kind, gd, N, K)


def expected_chamber_count(kind: str, q: int, N: int) -> int:
    if kind == "apartment":
        return 2 * N + 1
    if kind == "tree":
        return 1 + 2 * sum(q**j for j in range(1, N + 1))
    return 1 + sum(q**j for j in range(1, N + 1))


# ---------------------------------------------------------------------------
# images in the finite quotients


def _check_unit_det(g: PadicMatrix):
    if val(g.det(), g.p) != 0:
        raise RegionError("element does not lie in the stabilizer")


def finite_image(gd: GroupData, label: str, h: PadicMatrix) -> tuple[tuple, bool]:
    """Image of h in the finite quotient at [F] = label.

    h must map [F] to a face of the same dimension in the closed chamber.
    Returns (element as a 4-tuple mod p, crosses) where ``crosses`` means h
    swaps x0 and x1 (PGL2 only); then the element is the image of omega^-1 h
    and the caller composes with the omega map of the diagram.  At C an
    orientation-reversing h maps to J times the torus part of omega^-1 h.
    """
    p = gd.q
    cross = not is_type_preserving(gd, h)
    g = omega(p).inv() @ h if cross else h
    if label == "C":
        if gd.kind == "pgl2":
            g = g.primitive()
        v = g.vals()
        if min(v[0], v[1], v[3]) < 0 or v[2] < 1:
            raise RegionError("element does not lie in the Iwahori subgroup")
        _check_unit_det(g)
        a, _, _, d = g.reduce()
        return ((0, d, a, 0) if cross else (a, 0, 0, d)), False
    k = chart(p, label)
    g = k.inv() @ g @ k
    if gd.kind == "pgl2":
        g = g.primitive()
    if g.min_val() < 0:
        raise RegionError(f"element does not stabilize {label}")
    _check_unit_det(g)
    return g.reduce(), cross


def iwahori_bounds(dim: int, k: int) -> tuple[int, int]:
    """(up, low): I cap P_F is T_1 U(p^up) Ubar(p^low) for the apartment face
    vertex k (dim 0) or chamber (k, k+1) (dim 1)."""
    if dim == 0:
        return max(0, -k), max(1, k)
    return max(0, -k), max(1, k + 1)


def iwahori_generators(gd: GroupData, dim: int, k: int) -> list[PadicMatrix]:
    p = gd.q
    up, low = iwahori_bounds(dim, k)
    out = []
    for a in range(1, p):
        for e in (0, 1):
            out.append(upper(p, a * Fraction(p) ** (up + e)))
            out.append(lower(p, a * Fraction(p) ** (low + e)))
    if gd.kind == "sl2":
        out.append(mat(p, 1 + p, 0, 0, Fraction(1, 1 + p)))
    else:
        out.append(mat(p, 1 + p, 0, 0, 1))
    return out


def iwahori_coset_reps(gd: GroupData, face: tuple[int, int], sub: tuple[int, int]) -> list[PadicMatrix]:
    """Representatives of (I cap P_F') / (I cap P_F) for apartment faces
    F' = ``face`` contained in the closure of F = ``sub`` (given as (dim, k))."""
    p = gd.q
    u1, l1 = iwahori_bounds(*face)
    u2, l2 = iwahori_bounds(*sub)
    if u2 < u1 or l2 < l1 or u2 - u1 > 1 or l2 - l1 > 1:
        raise RegionError("faces are not incident")
    ups = [upper(p, a * Fraction(p) ** u1) for a in range(p)] if u2 > u1 else [PadicMatrix.identity(p)]
    lows = [lower(p, a * Fraction(p) ** l1) for a in range(p)] if l2 > l1 else [PadicMatrix.identity(p)]
    return [x @ y for x in ups for y in lows]


def in_iwahori(g: PadicMatrix, pro_p: bool = True) -> bool:
    v = g.vals()
    if min(v[0], v[1], v[3]) < 0 or v[2] < 1 or val(g.det(), g.p) != 0:
        return False
    if not pro_p:
        return True
    a, _, _, d = g.reduce()
    return a == 1 and d == 1
