# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trial-verdict kernel; mirrors probmut.kernels._numpy exactly."""

import numpy as np

cimport numpy as cnp


def statistical_kills(
    const double[::1] xh,
    const double[::1] xm,
    const cnp.intp_t[:, ::1] idx_h,
    const cnp.intp_t[:, ::1] idx_m,
    double t2_crit,
    double d2_min,
):
    cdef Py_ssize_t n_trials = idx_h.shape[0]
    cdef Py_ssize_t n1 = idx_h.shape[1]
    cdef Py_ssize_t n2 = idx_m.shape[1]
    cdef double df = <double>(n1 + n2 - 2)
    cdef double inv_n = 1.0 / n1 + 1.0 / n2

    out = np.zeros(n_trials, dtype=np.uint8)
    cdef unsigned char[::1] kills = out

    cdef Py_ssize_t i, j
    cdef double sx, sy, mx, my, dev, ssx, ssy, sp2, diff, d2, t2

    for i in range(n_trials):
        sx = 0.0
        for j in range(n1):
            sx += xh[idx_h[i, j]]
        mx = sx / n1
        ssx = 0.0
        for j in range(n1):
            dev = xh[idx_h[i, j]] - mx
            ssx += dev * dev

        sy = 0.0
        for j in range(n2):
            sy += xm[idx_m[i, j]]
        my = sy / n2
        ssy = 0.0
        for j in range(n2):
            dev = xm[idx_m[i, j]] - my
            ssy += dev * dev

        sp2 = (ssx + ssy) / df
        diff = mx - my
        if sp2 > 0.0:
            d2 = (diff * diff) / sp2
            t2 = d2 / inv_n
            if t2 > t2_crit and d2 >= d2_min:
                kills[i] = 1
        elif diff != 0.0:
            kills[i] = 1

    return out
