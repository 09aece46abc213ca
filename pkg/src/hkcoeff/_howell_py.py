"""Pure-Python Howell form kernel (numpy row operations).

Same contract as the compiled ``_howell`` module: ``howell_form(A, m)``
returns the canonical Howell matrix of the row span of ``A`` over Z/m with
zero rows removed.
"""

from math import gcd

import numpy as np


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def unit_normalizer(a: int, m: int) -> int:
    """Return a unit u of Z/m with u*a = gcd(a, m) (mod m)."""
    g = gcd(a, m)
    mg = m // g
    if mg == 1:
        return 1
    u = pow((a // g) % mg, -1, mg)
    while gcd(u, m) != 1:
        u += mg
    return u % m


def howell_form(A, m: int) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    r, c = A.shape
    H = np.zeros((r + c + 1, c), dtype=np.int64)
    H[:r] = A % m
    nrows = r
    row = 0
    for j in range(c):
        if row >= nrows:
            break
        nz = row + np.flatnonzero(H[row:nrows, j])
        if nz.size == 0:
            continue
        # bring a row whose entry has the smallest gcd with m to the top
        best = min(nz, key=lambda i: gcd(int(H[i, j]), m))
        if best != row:
            H[[row, best]] = H[[best, row]]
        a = int(H[row, j])
        for i in nz:
            if i == row:
                continue
            b = int(H[i, j])
            if b == 0 or b % a == 0:
                continue
            g, s, t = _xgcd(a, b)
            r1 = (s * H[row] + t * H[i]) % m
            r2 = ((-(b // g)) * H[row] + (a // g) * H[i]) % m
            H[row], H[i] = r1, r2
            a = int(H[row, j])
        u = unit_normalizer(a, m)
        if u != 1:
            H[row] = (H[row] * u) % m
        g = int(H[row, j])
        below = row + 1 + np.flatnonzero(H[row + 1:nrows, j])
        if below.size:
            f = H[below, j] // g
            H[below] = (H[below] - np.outer(f, H[row])) % m
        above = np.flatnonzero(H[:row, j] >= g)
        if above.size:
            f = H[above, j] // g
            H[above] = (H[above] - np.outer(f, H[row])) % m
        if g != 1:
            ann = (H[row] * (m // g)) % m
            if ann.any():
                H[nrows] = ann
                nrows += 1
        row += 1
    return H[:row].copy()
