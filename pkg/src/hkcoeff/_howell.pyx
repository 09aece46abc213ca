# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Howell form kernel over Z/m (m < 2**31)."""

import numpy as np
cimport numpy as cnp

ctypedef long long i64


cdef inline i64 _gcd(i64 a, i64 b) nogil:
    cdef i64 t
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef inline i64 _mod(i64 a, i64 m) nogil:
    a = a % m
    if a < 0:
        a += m
    return a


cdef void _xgcd(i64 a, i64 b, i64* g, i64* s, i64* t) nogil:
    cdef i64 x0 = 1, x1 = 0, y0 = 0, y1 = 1, q, tmp
    while b:
        q = a // b
        tmp = a - q * b
        a = b
        b = tmp
        tmp = x0 - q * x1
        x0 = x1
        x1 = tmp
        tmp = y0 - q * y1
        y0 = y1
        y1 = tmp
    g[0] = a
    s[0] = x0
    t[0] = y0


cdef i64 _inverse(i64 a, i64 n) nogil:
    cdef i64 g, s, t
    _xgcd(_mod(a, n), n, &g, &s, &t)
    return _mod(s, n)


cdef i64 _unit_normalizer(i64 a, i64 m) nogil:
    cdef i64 g = _gcd(a, m)
    cdef i64 mg = m // g
    cdef i64 u
    if mg == 1:
        return 1
    u = _inverse((a // g) % mg, mg)
    while _gcd(u, m) != 1:
        u += mg
    return u % m


cdef Py_ssize_t _howell_inplace(i64[:, ::1] H, Py_ssize_t nrows, i64 m) nogil:
    cdef Py_ssize_t c = H.shape[1]
    cdef Py_ssize_t row = 0, j, i, k, best
    cdef i64 a, b, g, s, t, bg, ag, f, u, bestg, gi, r1, r2, tmp
    cdef bint nonzero
    for j in range(c):
        if row >= nrows:
            break
        best = -1
        bestg = m + 1
        for i in range(row, nrows):
            if H[i, j] != 0:
                gi = _gcd(H[i, j], m)
                if gi < bestg:
                    bestg = gi
                    best = i
        if best < 0:
            continue
        if best != row:
            for k in range(c):
                tmp = H[row, k]
                H[row, k] = H[best, k]
                H[best, k] = tmp
        a = H[row, j]
        for i in range(row + 1, nrows):
            b = H[i, j]
            if b == 0 or b % a == 0:
                continue
            _xgcd(a, b, &g, &s, &t)
            bg = b // g
            ag = a // g
            for k in range(j, c):
                r1 = _mod(s * H[row, k] + t * H[i, k], m)
                r2 = _mod(-bg * H[row, k] + ag * H[i, k], m)
                H[row, k] = r1
                H[i, k] = r2
            a = H[row, j]
        u = _unit_normalizer(a, m)
        if u != 1:
            for k in range(j, c):
                H[row, k] = (H[row, k] * u) % m
        g = H[row, j]
        for i in range(row + 1, nrows):
            if H[i, j] != 0:
                f = H[i, j] // g
                for k in range(j, c):
                    H[i, k] = _mod(H[i, k] - f * H[row, k], m)
        for i in range(row):
            if H[i, j] >= g:
                f = H[i, j] // g
                for k in range(j, c):
                    H[i, k] = _mod(H[i, k] - f * H[row, k], m)
        if g != 1:
            nonzero = False
            for k in range(j, c):
                H[nrows, k] = (H[row, k] * (m // g)) % m
                if H[nrows, k] != 0:
                    nonzero = True
            for k in range(j):
                H[nrows, k] = 0
            if nonzero:
                nrows += 1
        row += 1
    return row


def howell_form(A, long long m):
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    if m >= 2 ** 31:
        raise ValueError("modulus too large for the compiled kernel")
    cdef Py_ssize_t r = A.shape[0], c = A.shape[1]
    buf = np.zeros((r + c + 1, c), dtype=np.int64)
    buf[:r] = A % m
    cdef i64[:, ::1] H = buf
    cdef Py_ssize_t rank
    with nogil:
        rank = _howell_inplace(H, r, m)
    return buf[:rank].copy()
