# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled GRU time-step kernels.

Same contract as sepforge._kernels.pygru; only the serial recurrence is
lowered to C loops. See pygru for the gate equations and argument shapes.
"""

import numpy as np

from libc.math cimport exp, tanh


def gru_forward_seq(double[:, ::1] xz, double[:, ::1] xr, double[:, ::1] xh,
                    double[:, ::1] uz, double[:, ::1] ur, double[:, ::1] uh,
                    double[::1] h0):
    cdef Py_ssize_t m = xz.shape[0]
    cdef Py_ssize_t n = xz.shape[1]
    hs_arr = np.empty((m, n))
    zs_arr = np.empty((m, n))
    rs_arr = np.empty((m, n))
    cs_arr = np.empty((m, n))
    cdef double[:, ::1] hs = hs_arr
    cdef double[:, ::1] zs = zs_arr
    cdef double[:, ::1] rs = rs_arr
    cdef double[:, ::1] cs = cs_arr
    work = np.empty((4, n))
    cdef double[:, ::1] wk = work
    cdef Py_ssize_t t, i, j
    cdef double hp, z, r, c

    for j in range(n):
        wk[3, j] = h0[j]
    for t in range(m):
        for j in range(n):
            wk[0, j] = xz[t, j]
            wk[1, j] = xr[t, j]
        for i in range(n):
            hp = wk[3, i]
            if hp != 0.0:
                for j in range(n):
                    wk[0, j] += hp * uz[i, j]
                    wk[1, j] += hp * ur[i, j]
        for j in range(n):
            zs[t, j] = 1.0 / (1.0 + exp(-wk[0, j]))
            rs[t, j] = 1.0 / (1.0 + exp(-wk[1, j]))
        for j in range(n):
            wk[2, j] = xh[t, j]
        for i in range(n):
            hp = rs[t, i] * wk[3, i]
            if hp != 0.0:
                for j in range(n):
                    wk[2, j] += hp * uh[i, j]
        for j in range(n):
            z = zs[t, j]
            c = tanh(wk[2, j])
            cs[t, j] = c
            hs[t, j] = (1.0 - z) * wk[3, j] + z * c
        for j in range(n):
            wk[3, j] = hs[t, j]
    return hs_arr, zs_arr, rs_arr, cs_arr


def gru_backward_seq(double[:, ::1] hs, double[:, ::1] zs, double[:, ::1] rs,
                     double[:, ::1] cs, double[:, ::1] uz, double[:, ::1] ur,
                     double[:, ::1] uh, double[::1] h0, double[:, ::1] dh):
    cdef Py_ssize_t m = hs.shape[0]
    cdef Py_ssize_t n = hs.shape[1]
    dxz_arr = np.empty((m, n))
    dxr_arr = np.empty((m, n))
    dxh_arr = np.empty((m, n))
    duz_arr = np.zeros((n, n))
    dur_arr = np.zeros((n, n))
    duh_arr = np.zeros((n, n))
    cdef double[:, ::1] dxz = dxz_arr
    cdef double[:, ::1] dxr = dxr_arr
    cdef double[:, ::1] dxh = dxh_arr
    cdef double[:, ::1] duz = duz_arr
    cdef double[:, ::1] dur = dur_arr
    cdef double[:, ::1] duh = duh_arr
    # work rows: 0 carry, 1 g, 2 dah, 3 drh, 4 daz, 5 dar
    work = np.zeros((6, n))
    cdef double[:, ::1] wk = work
    cdef Py_ssize_t t, i, j
    cdef double hp, z, r, c, g, dc, dz, dr, s, rh

    for t in range(m - 1, -1, -1):
        for j in range(n):
            wk[1, j] = dh[t, j] + wk[0, j]
        for j in range(n):
            z = zs[t, j]
            c = cs[t, j]
            g = wk[1, j]
            hp = hs[t - 1, j] if t > 0 else h0[j]
            dc = g * z
            dz = g * (c - hp)
            wk[0, j] = g * (1.0 - z)
            wk[2, j] = dc * (1.0 - c * c)
            wk[4, j] = dz * z * (1.0 - z)
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += wk[2, j] * uh[i, j]
            wk[3, i] = s
        for j in range(n):
            hp = hs[t - 1, j] if t > 0 else h0[j]
            r = rs[t, j]
            dr = wk[3, j] * hp
            wk[0, j] += wk[3, j] * r
            wk[5, j] = dr * r * (1.0 - r)
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += wk[4, j] * uz[i, j] + wk[5, j] * ur[i, j]
            wk[0, i] += s
        for j in range(n):
            dxz[t, j] = wk[4, j]
            dxr[t, j] = wk[5, j]
            dxh[t, j] = wk[2, j]
        for i in range(n):
            hp = hs[t - 1, i] if t > 0 else h0[i]
            rh = rs[t, i] * hp
            if hp != 0.0 or rh != 0.0:
                for j in range(n):
                    duz[i, j] += hp * wk[4, j]
                    dur[i, j] += hp * wk[5, j]
                    duh[i, j] += rh * wk[2, j]
    dh0 = np.empty(n)
    cdef double[::1] dh0v = dh0
    for j in range(n):
        dh0v[j] = wk[0, j]
    return dxz_arr, dxr_arr, dxh_arr, duz_arr, dur_arr, duh_arr, dh0
