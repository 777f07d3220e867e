# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels — the "c" backend.

Mirrors ``_ref.py`` primitive for primitive. Matrix-vector products and dot
products go through the same BLAS numpy links against (via scipy's C-level
wrappers), so they match the reference backend bit-for-bit; the elementwise
loops use libm, which can differ from numpy's vectorized transcendentals by
~1 ulp. Compile with -ffp-contract=off so no fused multiply-adds creep in.
"""

import numpy as np

from libc.math cimport fabs, pow, sqrt

from scipy.linalg.cython_blas cimport ddot, dgemv

BACKEND = "c"


cdef inline double[::1] _vec(object v):
    return np.ascontiguousarray(v, dtype=np.float64)


def mat_vec(mat, v):
    """mat @ v for a C-contiguous (rows × cols) matrix."""
    cdef double[:, ::1] m_ = np.ascontiguousarray(mat, dtype=np.float64)
    cdef double[::1] v_ = _vec(v)
    cdef int rows = m_.shape[0]
    cdef int cols = m_.shape[1]
    out = np.empty(rows, dtype=np.float64)
    cdef double[::1] o_ = out
    cdef int inc = 1
    cdef double one = 1.0
    cdef double zero = 0.0
    cdef char trans = b'T'
    if v_.shape[0] != cols:
        raise ValueError("mat_vec: dimension mismatch")
    # The C-order (rows × cols) buffer is, read column-major, the Fortran
    # (cols × rows) matrix matᵀ with lda=cols; trans='T' therefore computes
    # (matᵀ)ᵀ v = mat @ v.
    with nogil:
        dgemv(&trans, &cols, &rows, &one, &m_[0, 0], &cols,
              &v_[0], &inc, &zero, &o_[0], &inc)
    return out


def sub(a, b):
    cdef double[::1] a_ = _vec(a)
    cdef double[::1] b_ = _vec(b)
    cdef Py_ssize_t n = a_.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            o_[i] = a_[i] - b_[i]
    return out


def add2(a, b):
    cdef double[::1] a_ = _vec(a)
    cdef double[::1] b_ = _vec(b)
    cdef Py_ssize_t n = a_.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            o_[i] = a_[i] + b_[i]
    return out


def add3(a, b, c):
    cdef double[::1] a_ = _vec(a)
    cdef double[::1] b_ = _vec(b)
    cdef double[::1] c_ = _vec(c)
    cdef Py_ssize_t n = a_.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            o_[i] = (a_[i] + b_[i]) + c_[i]
    return out


def extrapolate(x, xp, w):
    cdef double[::1] x_ = _vec(x)
    cdef double[::1] p_ = _vec(xp)
    cdef double w_ = w
    cdef Py_ssize_t n = x_.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            o_[i] = x_[i] + w_ * (x_[i] - p_[i])
    return out


def scale(v, c):
    cdef double[::1] v_ = _vec(v)
    cdef double c_ = c
    cdef Py_ssize_t n = v_.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            o_[i] = c_ * v_[i]
    return out


def scale_sum(u, v, c):
    cdef double[::1] u_ = _vec(u)
    cdef double[::1] v_ = _vec(v)
    cdef double c_ = c
    cdef Py_ssize_t n = u_.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            o_[i] = c_ * (u_[i] + v_[i])
    return out


def soft_shrink(r, theta):
    cdef double[::1] r_ = _vec(r)
    cdef double th = theta
    cdef Py_ssize_t n = r_.shape[0], i
    cdef double ri, m
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            ri = r_[i]
            m = fabs(ri) - th
            o_[i] = 0.0 if m <= 0.0 else (m if ri > 0.0 else -m)
    return out


def soft_shrink_vec(r, theta):
    cdef double[::1] r_ = _vec(r)
    cdef double[::1] t_ = _vec(theta)
    cdef Py_ssize_t n = r_.shape[0], i
    cdef double ri, m
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            ri = r_[i]
            m = fabs(ri) - t_[i]
            o_[i] = 0.0 if m <= 0.0 else (m if ri > 0.0 else -m)
    return out


def qista_shrink(r, lam, eps, q):
    cdef double[::1] r_ = _vec(r)
    cdef double[::1] e_ = _vec(eps)
    cdef double lam_ = lam
    cdef double expo = 1.0 - q
    cdef Py_ssize_t n = r_.shape[0], i
    cdef double ri, mag, m
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_ = out
    with nogil:
        for i in range(n):
            ri = r_[i]
            mag = fabs(ri)
            m = mag - lam_ / pow(mag + e_[i], expo)
            o_[i] = 0.0 if m <= 0.0 else (m if ri > 0.0 else -m)
    return out


def diff_norm(a, b):
    cdef double[::1] a_ = _vec(a)
    cdef double[::1] b_ = _vec(b)
    cdef int n = <int> a_.shape[0]
    cdef int inc = 1
    cdef Py_ssize_t i
    cdef double out
    d = np.empty(n, dtype=np.float64)
    cdef double[::1] d_ = d
    with nogil:
        for i in range(n):
            d_[i] = a_[i] - b_[i]
        out = sqrt(ddot(&n, &d_[0], &inc, &d_[0], &inc))
    return out
