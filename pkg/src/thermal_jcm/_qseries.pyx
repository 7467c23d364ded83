# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Q-series block kernel.

One pass over (t, n) evaluates sin/cos of sqrt(n+c+m)|kappa|t once per shift m
and feeds both the g1 and g2 series.  The loop runs without the GIL.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs

cnp.import_array()

cdef double SMALL_X = 1e-8


cdef inline double _sin2_over_x(double x, double kt) noexcept nogil:
    cdef double s, y2
    if x >= SMALL_X:
        s = sin(sqrt(x) * kt)
        return s * s / x
    y2 = x * kt * kt
    return kt * kt * (1.0 - y2 / 3.0 + 2.0 * y2 * y2 / 45.0)


def q_block(t, weights, double c, double kappa, int l_max):
    """Return Q[kind, l, i]; same contract as the numpy fallback."""
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t nt = tv.shape[0]
    cdef Py_ssize_t nn = w.shape[0]
    cdef int nm = l_max + 2
    out_arr = np.zeros((2, l_max + 1, nt), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double ak = fabs(kappa)
    cdef Py_ssize_t i, n
    cdef int m
    cdef double kt, x, s, co, wn
    with nogil:
        for i in range(nt):
            kt = ak * tv[i]
            for n in range(nn):
                wn = w[n]
                if wn == 0.0:
                    continue
                for m in range(nm):
                    x = n + c + m
                    s = _sin2_over_x(x, kt)
                    if m <= l_max:
                        co = cos(sqrt(x) * kt)
                        out[0, m, i] += wn * (co * co + c * s)
                    if m >= 1:
                        out[1, m - 1, i] += wn * s * (n + m)
    return out_arr
