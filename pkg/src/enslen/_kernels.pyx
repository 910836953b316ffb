# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled coordinate kernels; see ``_kernels_py`` for the reference version."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)


cdef void _coords_into(const double complex[:, ::1] X, double[:, ::1] out,
                       Py_ssize_t col) noexcept nogil:
    cdef Py_ssize_t N = X.shape[0]
    cdef Py_ssize_t P = N * (N - 1) // 2
    cdef Py_ssize_t i, j, p = 0, l
    cdef double complex z
    cdef double running = 0.0
    for i in range(N):
        for j in range(i + 1, N):
            z = X[i, j]
            out[p, col] = SQRT2 * z.real
            out[P + p, col] = -SQRT2 * z.imag
            p += 1
    running = X[0, 0].real
    for l in range(1, N):
        out[2 * P + l - 1, col] = (running - l * X[l, l].real) / sqrt(<double>(l * (l + 1)))
        running += X[l, l].real


def herm_coords(X):
    cdef double complex[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.complex128)
    cdef Py_ssize_t N = Xv.shape[0]
    out = np.zeros((N * N - 1, 1))
    cdef double[:, ::1] ov = out
    with nogil:
        _coords_into(Xv, ov, 0)
    return out[:, 0]


def herm_coords_stack(Xs):
    cdef double complex[:, :, ::1] Xv = np.ascontiguousarray(Xs, dtype=np.complex128)
    cdef Py_ssize_t m = Xv.shape[0], N = Xv.shape[1], c
    out = np.zeros((N * N - 1, m))
    cdef double[:, ::1] ov = out
    with nogil:
        for c in range(m):
            _coords_into(Xv[c], ov, c)
    return out


def sandwich_coords(L, D, R, double weight):
    cdef double complex[:, ::1] Lv = np.ascontiguousarray(L, dtype=np.complex128)
    cdef double complex[:, :, ::1] Dv = np.ascontiguousarray(D, dtype=np.complex128)
    cdef double complex[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.complex128)
    cdef Py_ssize_t a = Lv.shape[0], n = Dv.shape[1], b = Rv.shape[0]
    cdef Py_ssize_t m = Dv.shape[0]
    cdef Py_ssize_t N = a * n * b
    cdef Py_ssize_t P = N * (N - 1) // 2
    cdef Py_ssize_t c, i, j, p, l
    cdef double complex z
    cdef double running, d
    cdef Py_ssize_t[::1] xs = np.empty(N, dtype=np.intp)
    cdef Py_ssize_t[::1] ys = np.empty(N, dtype=np.intp)
    cdef Py_ssize_t[::1] zs = np.empty(N, dtype=np.intp)
    for i in range(N):
        xs[i] = i // (n * b)
        ys[i] = (i // b) % n
        zs[i] = i % b
    out = np.zeros((N * N - 1, m))
    cdef double[:, ::1] ov = out
    with nogil:
        for c in range(m):
            p = 0
            for i in range(N):
                for j in range(i + 1, N):
                    z = weight * Lv[xs[i], xs[j]] * Dv[c, ys[i], ys[j]] * Rv[zs[i], zs[j]]
                    ov[p, c] = SQRT2 * z.real
                    ov[P + p, c] = -SQRT2 * z.imag
                    p += 1
            running = weight * (Lv[xs[0], xs[0]] * Dv[c, ys[0], ys[0]] * Rv[zs[0], zs[0]]).real
            for l in range(1, N):
                d = weight * (Lv[xs[l], xs[l]] * Dv[c, ys[l], ys[l]] * Rv[zs[l], zs[l]]).real
                ov[2 * P + l - 1, c] = (running - l * d) / sqrt(<double>(l * (l + 1)))
                running += d
    return out
