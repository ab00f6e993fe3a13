# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must match webnav._kernels._pyref exactly in shape
and update order (see the backend equivalence tests)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


def affine_tanh_fwd(double[:, ::1] W, double[::1] b, double[::1] x):
    cdef Py_ssize_t H = W.shape[0], I = W.shape[1]
    cdef cnp.ndarray[double, ndim=1] a = np.empty(H)
    cdef double[::1] av = a
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(H):
        s = b[i]
        for j in range(I):
            s += W[i, j] * x[j]
        av[i] = tanh(s)
    return a


def affine_tanh_bwd(double[:, ::1] W, double[::1] x, double[::1] a,
                    double[::1] da):
    cdef Py_ssize_t H = W.shape[0], I = W.shape[1]
    cdef cnp.ndarray[double, ndim=2] dW = np.empty((H, I))
    cdef cnp.ndarray[double, ndim=1] db = np.empty(H)
    cdef cnp.ndarray[double, ndim=1] dx = np.zeros(I)
    cdef double[:, ::1] dWv = dW
    cdef double[::1] dbv = db, dxv = dx
    cdef Py_ssize_t i, j
    cdef double dz
    for i in range(H):
        dz = da[i] * (1.0 - a[i] * a[i])
        dbv[i] = dz
        for j in range(I):
            dWv[i, j] = dz * x[j]
            dxv[j] += W[i, j] * dz
    return dW, db, dx


cdef inline double _sigmoid(double z) nogil:
    return 1.0 / (1.0 + exp(-z))


def lstm_step_fwd(double[:, ::1] Wx, double[:, ::1] Wh, double[::1] b,
                  double[::1] x, double[::1] h_prev, double[::1] c_prev):
    cdef Py_ssize_t H = h_prev.shape[0], I = x.shape[0]
    cdef cnp.ndarray[double, ndim=1] h = np.empty(H)
    cdef cnp.ndarray[double, ndim=1] c = np.empty(H)
    cdef cnp.ndarray[double, ndim=1] gates = np.empty(4 * H)
    cdef double[::1] hv = h, cv = c, gv = gates
    cdef Py_ssize_t r, j, k
    cdef double s
    for r in range(4 * H):
        s = b[r]
        for j in range(I):
            s += Wx[r, j] * x[j]
        for j in range(H):
            s += Wh[r, j] * h_prev[j]
        if r < 3 * H:
            gv[r] = _sigmoid(s)
        else:
            gv[r] = tanh(s)
    for k in range(H):
        cv[k] = gv[H + k] * c_prev[k] + gv[k] * gv[3 * H + k]
        hv[k] = gv[2 * H + k] * tanh(cv[k])
    return h, c, gates


def lstm_step_bwd(double[:, ::1] Wx, double[:, ::1] Wh, double[::1] x,
                  double[::1] h_prev, double[::1] c_prev, double[::1] gates,
                  double[::1] c_new, double[::1] dh, double[::1] dc):
    cdef Py_ssize_t H = h_prev.shape[0], I = x.shape[0]
    cdef cnp.ndarray[double, ndim=2] dWx = np.empty((4 * H, I))
    cdef cnp.ndarray[double, ndim=2] dWh = np.empty((4 * H, H))
    cdef cnp.ndarray[double, ndim=1] dpre = np.empty(4 * H)
    cdef cnp.ndarray[double, ndim=1] dx = np.zeros(I)
    cdef cnp.ndarray[double, ndim=1] dh_prev = np.zeros(H)
    cdef cnp.ndarray[double, ndim=1] dc_prev = np.empty(H)
    cdef double[:, ::1] dWxv = dWx, dWhv = dWh
    cdef double[::1] dprev = dpre, dxv = dx, dhpv = dh_prev, dcpv = dc_prev
    cdef Py_ssize_t k, r, j
    cdef double tc, dct, ig, fg, og, gg, v
    for k in range(H):
        ig = gates[k]
        fg = gates[H + k]
        og = gates[2 * H + k]
        gg = gates[3 * H + k]
        tc = tanh(c_new[k])
        dct = dc[k] + dh[k] * og * (1.0 - tc * tc)
        dprev[k] = (dct * gg) * ig * (1.0 - ig)
        dprev[H + k] = (dct * c_prev[k]) * fg * (1.0 - fg)
        dprev[2 * H + k] = (dh[k] * tc) * og * (1.0 - og)
        dprev[3 * H + k] = (dct * ig) * (1.0 - gg * gg)
        dcpv[k] = dct * fg
    for r in range(4 * H):
        v = dprev[r]
        for j in range(I):
            dWxv[r, j] = v * x[j]
            dxv[j] += Wx[r, j] * v
        for j in range(H):
            dWhv[r, j] = v * h_prev[j]
            dhpv[j] += Wh[r, j] * v
    return dWx, dWh, dpre, dx, dh_prev, dc_prev


def cbow_epoch(float[:, ::1] w_in, float[:, ::1] w_out, int[::1] centers,
               int[::1] ctx_flat, int[::1] ctx_off, int[:, ::1] negatives,
               double lr):
    cdef Py_ssize_t P = centers.shape[0], D = w_in.shape[1]
    cdef Py_ssize_t n_neg = negatives.shape[1]
    cdef cnp.ndarray[double, ndim=1] h_arr = np.empty(D)
    cdef cnp.ndarray[double, ndim=1] e_arr = np.empty(D)
    cdef double[::1] h = h_arr, neu1e = e_arr
    cdef Py_ssize_t p, s, j, word, c, lo, hi, nctx
    cdef double z, grad, label
    for p in range(P):
        lo = ctx_off[p]
        hi = ctx_off[p + 1]
        nctx = hi - lo
        for j in range(D):
            h[j] = 0.0
        for c in range(lo, hi):
            word = ctx_flat[c]
            for j in range(D):
                h[j] += w_in[word, j]
        for j in range(D):
            h[j] /= nctx
            neu1e[j] = 0.0
        for s in range(n_neg + 1):
            if s == 0:
                word = centers[p]
                label = 1.0
            else:
                word = negatives[p, s - 1]
                if word == centers[p]:
                    continue
                label = 0.0
            z = 0.0
            for j in range(D):
                z += w_out[word, j] * h[j]
            if z > 30.0:
                z = 30.0
            elif z < -30.0:
                z = -30.0
            grad = (label - _sigmoid(z)) * lr
            for j in range(D):
                neu1e[j] += grad * w_out[word, j]
                w_out[word, j] = <float>(w_out[word, j] + grad * h[j])
        for j in range(D):
            neu1e[j] /= nctx
        for c in range(lo, hi):
            word = ctx_flat[c]
            for j in range(D):
                w_in[word, j] = <float>(w_in[word, j] + neu1e[j])
    return None
