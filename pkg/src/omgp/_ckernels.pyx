# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled covariance hot loops (see _pykernels for the reference versions)."""
import numpy as np
from libc.math cimport exp


def se_ard_gram(double[:, ::1] A, double[:, ::1] B, double signal_power,
                length_scales):
    cdef Py_ssize_t n = A.shape[0], m = B.shape[0], dim = A.shape[1]
    cdef Py_ssize_t i, j, p
    cdef double acc, diff
    cdef double[::1] inv = 1.0 / np.ascontiguousarray(length_scales, dtype=np.float64)
    out = np.empty((n, m))
    cdef double[:, ::1] K = out
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for p in range(dim):
                diff = A[i, p] - B[j, p]
                acc += diff * diff * inv[p]
            K[i, j] = signal_power * exp(-0.5 * acc)
    return out


def se_ard_length_grads(double[:, ::1] A, double[:, ::1] K, length_scales):
    cdef Py_ssize_t n = A.shape[0], dim = A.shape[1]
    cdef Py_ssize_t i, j, p
    cdef double diff, g
    cdef double[::1] half_inv = 0.5 / np.ascontiguousarray(length_scales, dtype=np.float64)
    out = np.empty((dim, n, n))
    cdef double[:, :, ::1] G = out
    for p in range(dim):
        for i in range(n):
            G[p, i, i] = 0.0
            for j in range(i + 1, n):
                diff = A[i, p] - A[j, p]
                g = K[i, j] * diff * diff * half_inv[p]
                G[p, i, j] = g
                G[p, j, i] = g
    return out


def exact_match(double[:, ::1] A, double[:, ::1] B):
    cdef Py_ssize_t n = A.shape[0], m = B.shape[0], dim = A.shape[1]
    cdef Py_ssize_t i, j, p
    cdef bint same
    out = np.zeros((n, m))
    cdef double[:, ::1] E = out
    for i in range(n):
        for j in range(m):
            same = True
            for p in range(dim):
                if A[i, p] != B[j, p]:
                    same = False
                    break
            if same:
                E[i, j] = 1.0
    return out
