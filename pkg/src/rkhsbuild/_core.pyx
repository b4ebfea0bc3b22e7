# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Gram assembly, pivoted Cholesky, Toeplitz forms.

Signatures and numerical behaviour match ``_fallback`` exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, sqrt, pow, INFINITY
from scipy.linalg.cython_blas cimport ddot, dgemv

cnp.import_array()

cdef enum:
    BROWNIAN_MIN = 0
    BESSEL_SERIES = 1
    FBM_SINGULAR = 2
    GAUSS_RBF = 3

cdef double SERIES_RTOL = 1e-16


cdef inline double _bessel(double x, int n_terms) nogil:
    cdef double total = 1.0, term = 1.0, ax = fabs(x)
    cdef int n
    for n in range(1, n_terms):
        term = term * x / (<double>n * n)
        total = total + term
        if fabs(term) < SERIES_RTOL * fabs(total) and <double>n * n > ax:
            break
    return total


def cross_gram(int kind, X, Y, double param):
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], m = yv.shape[0], d = xv.shape[1]
    cdef Py_ssize_t i, j, c
    cdef double a, b, diff, sq, expo, denom
    cdef int n_terms = <int>param
    if kind < 0 or kind > 3:
        raise ValueError(f"unknown kernel code {kind}")
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] ov = out
    expo = 2.0 * param - 2.0
    denom = 2.0 * param * param
    with nogil:
        for i in range(n):
            for j in range(m):
                a = xv[i, 0]
                b = yv[j, 0]
                if kind == BROWNIAN_MIN:
                    ov[i, j] = a if a < b else b
                elif kind == BESSEL_SERIES:
                    ov[i, j] = _bessel(a * b, n_terms)
                elif kind == FBM_SINGULAR:
                    diff = fabs(a - b)
                    ov[i, j] = INFINITY if diff == 0.0 else pow(diff, expo)
                else:
                    sq = 0.0
                    for c in range(d):
                        diff = xv[i, c] - yv[j, c]
                        sq = sq + diff * diff
                    ov[i, j] = exp(-sq / denom)
    return out


def pivoted_cholesky(K, double rel_tol):
    cdef const double[:, ::1] A = np.ascontiguousarray(K, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0]
    piv_arr = np.arange(m, dtype=np.intp)
    cdef Py_ssize_t[::1] piv = piv_arr
    d_arr = np.array([A[i, i] for i in range(m)], dtype=np.float64)
    cdef double[::1] dg = d_arr
    L_arr = np.zeros((m, m), dtype=np.float64)
    cdef double[:, ::1] L = L_arr
    cdef Py_ssize_t i, j, k, q, pj, best_pos
    cdef Py_ssize_t rank = 0
    cdef double dmax, first = 0.0, root, acc, tmp
    col_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] col = col_arr
    cdef int ni, nrest, ld = <int>m, inc = 1
    cdef double one = 1.0, minus_one = -1.0
    cdef char* trans = b"T"
    with nogil:
        for i in range(m):
            best_pos = i
            dmax = dg[piv[i]]
            for k in range(i + 1, m):
                tmp = dg[piv[k]]
                if tmp > dmax or (tmp == dmax and piv[k] < piv[best_pos]):
                    dmax = tmp
                    best_pos = k
            if i == 0:
                first = dmax
                if not dmax > 0.0:
                    break
            if not dmax > rel_tol * first:
                break
            j = best_pos
            pj = piv[j]
            piv[j] = piv[i]
            piv[i] = pj
            for q in range(i):
                tmp = L[i, q]
                L[i, q] = L[j, q]
                L[j, q] = tmp
            root = sqrt(dmax)
            L[i, i] = root
            nrest = <int>(m - i - 1)
            if nrest == 0:
                dg[pj] = 0.0
                rank += 1
                continue
            for k in range(i + 1, m):
                col[k] = A[piv[k], pj]
            if i > 0:
                # col[i+1:] -= L[i+1:, :i] @ L[i, :i]; the row-major block is
                # column-major with leading dimension m, hence the transpose
                ni = <int>i
                dgemv(trans, &ni, &nrest, &minus_one, &L[i + 1, 0], &ld, &L[i, 0], &inc, &one, &col[i + 1], &inc)
            for k in range(i + 1, m):
                acc = col[k] / root
                L[k, i] = acc
                dg[piv[k]] = dg[piv[k]] - acc * acc
            dg[pj] = 0.0
            rank += 1
    return L_arr[:, :rank].copy(), piv_arr, int(rank)


def toeplitz_quadratic(f, w):
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0], i, lag
    cdef double total, acc
    cdef int nl, inc = 1
    with nogil:
        total = 0.0
        for i in range(n):
            total = total + fv[i] * fv[i]
        total = total * wv[0]
        for lag in range(1, n):
            nl = <int>(n - lag)
            acc = ddot(&nl, <double*>&fv[0], &inc, <double*>&fv[lag], &inc)
            total = total + 2.0 * wv[lag] * acc
    return float(total)
