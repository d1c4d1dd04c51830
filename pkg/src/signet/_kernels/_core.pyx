# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot kernels.

Same surface and semantics as ``_fallback``; plain C loops instead of numpy
calls, which pays off because the matrices here are tiny (a dozen rows at
most) and the call counts are large.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

from libc.math cimport ceil, log2

cdef int TAYLOR_ORDER = 16
cdef double SCALE_LIMIT = 0.5

cdef double[::1] _coeff = np.cumprod(
    [1.0] + [1.0 / k for k in range(1, 17)]
)


cdef void _matmul(double[:, ::1] a, double[:, ::1] b, double[:, ::1] out,
                  Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


cdef void _expm_into(double[:, ::1] a, double[:, ::1] out,
                     double[:, ::1] scratch_a, double[:, ::1] scratch_b,
                     Py_ssize_t n) noexcept nogil:
    """out = exp(a); scratch buffers are caller-provided n-by-n arrays."""
    cdef Py_ssize_t i, j
    cdef int squarings = 0, order = TAYLOR_ORDER, step
    cdef double norm = 0.0, row, scale

    for i in range(n):
        row = 0.0
        for j in range(n):
            row += a[i, j] if a[i, j] >= 0.0 else -a[i, j]
        if row > norm:
            norm = row
    if norm > SCALE_LIMIT:
        squarings = <int>ceil(log2(norm / SCALE_LIMIT))
    scale = 1.0 / (2.0 ** squarings)

    for i in range(n):
        for j in range(n):
            scratch_a[i, j] = a[i, j] * scale

    # Horner evaluation of the truncated Taylor sum.
    for i in range(n):
        for j in range(n):
            out[i, j] = _coeff[order] if i == j else 0.0
    for step in range(order - 1, -1, -1):
        _matmul(scratch_a, out, scratch_b, n)
        for i in range(n):
            for j in range(n):
                out[i, j] = scratch_b[i, j] + (_coeff[step] if i == j else 0.0)

    for step in range(squarings):
        _matmul(out, out, scratch_b, n)
        for i in range(n):
            for j in range(n):
                out[i, j] = scratch_b[i, j]


def expm(a):
    """Matrix exponential by scaling and squaring of a truncated Taylor sum."""
    cdef double[:, ::1] mat = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n = mat.shape[0]
    out_arr = np.empty((n, n))
    cdef double[:, ::1] out = out_arr
    scratch_a = np.empty((n, n))
    scratch_b = np.empty((n, n))
    cdef double[:, ::1] sa = scratch_a
    cdef double[:, ::1] sb = scratch_b
    with nogil:
        _expm_into(mat, out, sa, sb, n)
    return out_arr


def chain_product(gens, dts):
    """Product exp(gens[m-1]*dts[m-1]) @ ... @ exp(gens[0]*dts[0])."""
    cdef double[:, :, ::1] g = np.ascontiguousarray(gens, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(dts, dtype=np.float64)
    cdef Py_ssize_t m = g.shape[0], n = g.shape[1], k, i, j
    out_arr = np.eye(n)
    cdef double[:, ::1] out = out_arr
    buf = np.empty((4, n, n))
    cdef double[:, :, ::1] w = buf
    with nogil:
        for k in range(m):
            for i in range(n):
                for j in range(n):
                    w[0, i, j] = g[k, i, j] * d[k]
            _expm_into(w[0], w[1], w[2], w[3], n)
            _matmul(w[1], out, w[2], n)
            for i in range(n):
                for j in range(n):
                    out[i, j] = w[2, i, j]
    return out_arr


def forward_states(steps, init):
    """Cumulative left products: result[0]=init, result[j]=steps[j-1] @ result[j-1]."""
    cdef double[:, :, ::1] st = np.ascontiguousarray(steps, dtype=np.float64)
    cdef double[:, ::1] start = np.ascontiguousarray(init, dtype=np.float64)
    cdef Py_ssize_t m = st.shape[0], n = st.shape[1], j, i, k
    out_arr = np.empty((m + 1, n, n))
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for k in range(n):
                out[0, i, k] = start[i, k]
        for j in range(m):
            _matmul(st[j], out[j], out[j + 1], n)
    return out_arr


def backward_states(steps):
    """Cumulative right products: result[m]=I, result[j]=result[j+1] @ steps[j]."""
    cdef double[:, :, ::1] st = np.ascontiguousarray(steps, dtype=np.float64)
    cdef Py_ssize_t m = st.shape[0], n = st.shape[1], j, i, k
    out_arr = np.empty((m + 1, n, n))
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for k in range(n):
                out[m, i, k] = 1.0 if i == k else 0.0
        for j in range(m - 1, -1, -1):
            _matmul(out[j + 1], st[j], out[j], n)
    return out_arr


def series_levels(steps, widths, couplings, order):
    """Nested-integral series levels at the final grid node.

    See the fallback for the full contract: per-step propagators, widths and
    per-step couplings describe a switch-aligned trapezoid grid; the result
    stacks the level values at the last node, shape (order+1, n, n).
    """
    cdef double[:, :, ::1] st = np.ascontiguousarray(steps, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(widths, dtype=np.float64)
    cdef double[:, :, ::1] cp = np.ascontiguousarray(couplings, dtype=np.float64)
    cdef Py_ssize_t m = st.shape[0], n = st.shape[1]
    cdef int levels = order
    out_arr = np.empty((levels + 1, n, n))
    cdef double[:, :, ::1] out = out_arr
    prev_arr = np.empty((m + 1, n, n))
    cur_arr = np.empty((m + 1, n, n))
    cdef double[:, :, ::1] prev = prev_arr
    cdef double[:, :, ::1] cur = cur_arr
    tmp_arr = np.empty((3, n, n))
    cdef double[:, :, ::1] tmp = tmp_arr
    cdef Py_ssize_t i, j, k, lev
    cdef double half
    with nogil:
        for i in range(n):
            for k in range(n):
                prev[0, i, k] = 1.0 if i == k else 0.0
        for j in range(m):
            _matmul(st[j], prev[j], prev[j + 1], n)
        for i in range(n):
            for k in range(n):
                out[0, i, k] = prev[m, i, k]

        for lev in range(1, levels + 1):
            for i in range(n):
                for k in range(n):
                    cur[0, i, k] = 0.0
            for j in range(m):
                half = 0.5 * w[j]
                _matmul(cp[j], prev[j], tmp[0], n)      # coupling at left node
                _matmul(cp[j], prev[j + 1], tmp[1], n)  # coupling at right node
                for i in range(n):
                    for k in range(n):
                        tmp[2, i, k] = cur[j, i, k] + half * tmp[0, i, k]
                _matmul(st[j], tmp[2], tmp[0], n)
                for i in range(n):
                    for k in range(n):
                        cur[j + 1, i, k] = tmp[0, i, k] + half * tmp[1, i, k]
            for i in range(n):
                for k in range(n):
                    out[lev, i, k] = cur[m, i, k]
            prev, cur = cur, prev
    return out_arr


def trapezoid_triple(left, mid, right, widths):
    """Trapezoid rule for the integral of left(s) @ mid(s) @ right(s)."""
    cdef double[:, :, ::1] L = np.ascontiguousarray(left, dtype=np.float64)
    cdef double[:, :, ::1] M = np.ascontiguousarray(mid, dtype=np.float64)
    cdef double[:, :, ::1] R = np.ascontiguousarray(right, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(widths, dtype=np.float64)
    cdef Py_ssize_t m = M.shape[0], n = M.shape[1], j, i, k
    out_arr = np.zeros((n, n))
    cdef double[:, ::1] out = out_arr
    tmp_arr = np.empty((2, n, n))
    cdef double[:, :, ::1] tmp = tmp_arr
    cdef double half
    with nogil:
        for j in range(m):
            half = 0.5 * w[j]
            _matmul(M[j], R[j], tmp[0], n)
            _matmul(L[j], tmp[0], tmp[1], n)
            for i in range(n):
                for k in range(n):
                    out[i, k] += half * tmp[1, i, k]
            _matmul(M[j], R[j + 1], tmp[0], n)
            _matmul(L[j + 1], tmp[0], tmp[1], n)
            for i in range(n):
                for k in range(n):
                    out[i, k] += half * tmp[1, i, k]
    return out_arr
