# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

from ._pykernels import twiddles


def dft_direct(x, int sign):
    cdef const double complex[::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef Py_ssize_t n = xv.shape[0]
    cdef const double complex[::1] w = twiddles(n, sign)
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t k, m, idx
    cdef double complex acc
    for k in range(n):
        acc = 0
        idx = 0
        for m in range(n):
            acc = acc + xv[m] * w[idx]
            idx += k
            if idx >= n:
                idx -= n
        ov[k] = acc
    return out


def polyphase(x, h, long long p, long long q, long long offset, Py_ssize_t n_out):
    cdef const double complex[::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef Py_ssize_t L = hv.shape[0], nx = xv.shape[0]
    out = np.empty(n_out, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t m
    cdef long long j, base, arm, r, tap, src
    cdef double complex acc
    for m in range(n_out):
        j = offset + m * q
        base = j // p
        arm = j - base * p
        acc = 0
        r = 0
        tap = arm
        while tap < L:
            src = base - r
            if 0 <= src < nx:
                acc = acc + hv[tap] * xv[src]
            r += 1
            tap += p
        ov[m] = acc
    return out


def farrow(x, coeffs, long long phase0, long long step, long long denom, Py_ssize_t n_out):
    cdef const double complex[::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const double[:, ::1] cv = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t rows = cv.shape[0], ncoef = cv.shape[1], nx = xv.shape[0]
    out = np.empty(n_out, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t m, r, c
    cdef long long phase = phase0, base, rem, src
    cdef double mu, poly
    cdef double complex acc
    for m in range(n_out):
        base = phase // denom
        rem = phase - base * denom
        mu = <double>rem / <double>denom
        acc = 0
        for r in range(rows):
            src = base - r
            if src < 0:
                break
            if src >= nx:
                continue
            poly = cv[r, ncoef - 1]
            for c in range(ncoef - 2, -1, -1):
                poly = poly * mu + cv[r, c]
            acc = acc + poly * xv[src]
        ov[m] = acc
        phase += step
    return out
