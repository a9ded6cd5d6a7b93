# cython: language_level=3
"""Compiled training hot loops; mirrors diedat._kernels_py.

Gate order (i, f, o, g) and the in-place update order of sgns_step are
identical to the fallback so both backends stay interchangeable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, fmax, log1p, tanh


cdef inline double _sig(double x) noexcept nogil:
    return 0.5 * (1.0 + tanh(0.5 * x))


def lstm_forward(X, Wi, Wf, Wo, Wg, Ui, Uf, Uo, Ug, bi, bf, bo, bg):
    """Run one LSTM direction over X[T, d] from zero initial state.

    Returns (H, C, I, F, O, G), each [T, h]; the tuple is the backward cache.
    """
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] Wiv = np.ascontiguousarray(Wi, dtype=np.float64)
    cdef double[:, ::1] Wfv = np.ascontiguousarray(Wf, dtype=np.float64)
    cdef double[:, ::1] Wov = np.ascontiguousarray(Wo, dtype=np.float64)
    cdef double[:, ::1] Wgv = np.ascontiguousarray(Wg, dtype=np.float64)
    cdef double[:, ::1] Uiv = np.ascontiguousarray(Ui, dtype=np.float64)
    cdef double[:, ::1] Ufv = np.ascontiguousarray(Uf, dtype=np.float64)
    cdef double[:, ::1] Uov = np.ascontiguousarray(Uo, dtype=np.float64)
    cdef double[:, ::1] Ugv = np.ascontiguousarray(Ug, dtype=np.float64)
    cdef double[::1] biv = np.ascontiguousarray(bi, dtype=np.float64)
    cdef double[::1] bfv = np.ascontiguousarray(bf, dtype=np.float64)
    cdef double[::1] bov = np.ascontiguousarray(bo, dtype=np.float64)
    cdef double[::1] bgv = np.ascontiguousarray(bg, dtype=np.float64)

    cdef Py_ssize_t T = Xv.shape[0]
    cdef Py_ssize_t d = Xv.shape[1]
    cdef Py_ssize_t h = biv.shape[0]

    H_arr = np.empty((T, h))
    C_arr = np.empty((T, h))
    I_arr = np.empty((T, h))
    F_arr = np.empty((T, h))
    O_arr = np.empty((T, h))
    G_arr = np.empty((T, h))
    cdef double[:, ::1] H = H_arr
    cdef double[:, ::1] C = C_arr
    cdef double[:, ::1] I = I_arr
    cdef double[:, ::1] F = F_arr
    cdef double[:, ::1] O = O_arr
    cdef double[:, ::1] G = G_arr
    cdef double[::1] hp = np.zeros(h)
    cdef double[::1] cp = np.zeros(h)

    cdef Py_ssize_t t, j, k
    cdef double ai, af, ao, ag, it, ft, ot, gt, ct
    with nogil:
        for t in range(T):
            for j in range(h):
                ai = biv[j]
                af = bfv[j]
                ao = bov[j]
                ag = bgv[j]
                for k in range(d):
                    ai += Wiv[j, k] * Xv[t, k]
                    af += Wfv[j, k] * Xv[t, k]
                    ao += Wov[j, k] * Xv[t, k]
                    ag += Wgv[j, k] * Xv[t, k]
                for k in range(h):
                    ai += Uiv[j, k] * hp[k]
                    af += Ufv[j, k] * hp[k]
                    ao += Uov[j, k] * hp[k]
                    ag += Ugv[j, k] * hp[k]
                it = _sig(ai)
                ft = _sig(af)
                ot = _sig(ao)
                gt = tanh(ag)
                ct = ft * cp[j] + it * gt
                I[t, j] = it
                F[t, j] = ft
                O[t, j] = ot
                G[t, j] = gt
                C[t, j] = ct
                H[t, j] = ot * tanh(ct)
            for j in range(h):
                hp[j] = H[t, j]
                cp[j] = C[t, j]
    return H_arr, C_arr, I_arr, F_arr, O_arr, G_arr


def lstm_backward(dH, X, H, C, I, F, O, G, Wi, Wf, Wo, Wg, Ui, Uf, Uo, Ug):
    """Backpropagate through lstm_forward; same contract as the fallback."""
    cdef double[:, ::1] dHv = np.ascontiguousarray(dH, dtype=np.float64)
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] Hv = np.ascontiguousarray(H, dtype=np.float64)
    cdef double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef double[:, ::1] Iv = np.ascontiguousarray(I, dtype=np.float64)
    cdef double[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.float64)
    cdef double[:, ::1] Ov = np.ascontiguousarray(O, dtype=np.float64)
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[:, ::1] Wiv = np.ascontiguousarray(Wi, dtype=np.float64)
    cdef double[:, ::1] Wfv = np.ascontiguousarray(Wf, dtype=np.float64)
    cdef double[:, ::1] Wov = np.ascontiguousarray(Wo, dtype=np.float64)
    cdef double[:, ::1] Wgv = np.ascontiguousarray(Wg, dtype=np.float64)
    cdef double[:, ::1] Uiv = np.ascontiguousarray(Ui, dtype=np.float64)
    cdef double[:, ::1] Ufv = np.ascontiguousarray(Uf, dtype=np.float64)
    cdef double[:, ::1] Uov = np.ascontiguousarray(Uo, dtype=np.float64)
    cdef double[:, ::1] Ugv = np.ascontiguousarray(Ug, dtype=np.float64)

    cdef Py_ssize_t T = dHv.shape[0]
    cdef Py_ssize_t h = dHv.shape[1]
    cdef Py_ssize_t d = Xv.shape[1]

    dAi_arr = np.empty((T, h))
    dAf_arr = np.empty((T, h))
    dAo_arr = np.empty((T, h))
    dAg_arr = np.empty((T, h))
    dX_arr = np.zeros((T, d))
    dWi_arr = np.zeros((h, d))
    dWf_arr = np.zeros((h, d))
    dWo_arr = np.zeros((h, d))
    dWg_arr = np.zeros((h, d))
    dUi_arr = np.zeros((h, h))
    dUf_arr = np.zeros((h, h))
    dUo_arr = np.zeros((h, h))
    dUg_arr = np.zeros((h, h))
    dbi_arr = np.zeros(h)
    dbf_arr = np.zeros(h)
    dbo_arr = np.zeros(h)
    dbg_arr = np.zeros(h)
    cdef double[:, ::1] dAi = dAi_arr
    cdef double[:, ::1] dAf = dAf_arr
    cdef double[:, ::1] dAo = dAo_arr
    cdef double[:, ::1] dAg = dAg_arr
    cdef double[:, ::1] dX = dX_arr
    cdef double[:, ::1] dWi = dWi_arr
    cdef double[:, ::1] dWf = dWf_arr
    cdef double[:, ::1] dWo = dWo_arr
    cdef double[:, ::1] dWg = dWg_arr
    cdef double[:, ::1] dUi = dUi_arr
    cdef double[:, ::1] dUf = dUf_arr
    cdef double[:, ::1] dUo = dUo_arr
    cdef double[:, ::1] dUg = dUg_arr
    cdef double[::1] dbi = dbi_arr
    cdef double[::1] dbf = dbf_arr
    cdef double[::1] dbo = dbo_arr
    cdef double[::1] dbg = dbg_arr
    cdef double[::1] dh_next = np.zeros(h)
    cdef double[::1] dc_next = np.zeros(h)

    cdef Py_ssize_t t, j, k
    cdef double dh, tc, dc, cprev, di, df, do, dg, ai, af, ao, ag
    with nogil:
        for t in range(T - 1, -1, -1):
            for j in range(h):
                dh = dHv[t, j] + dh_next[j]
                tc = tanh(Cv[t, j])
                dc = dc_next[j] + dh * Ov[t, j] * (1.0 - tc * tc)
                cprev = Cv[t - 1, j] if t > 0 else 0.0
                di = dc * Gv[t, j]
                df = dc * cprev
                do = dh * tc
                dg = dc * Iv[t, j]
                dAi[t, j] = di * Iv[t, j] * (1.0 - Iv[t, j])
                dAf[t, j] = df * Fv[t, j] * (1.0 - Fv[t, j])
                dAo[t, j] = do * Ov[t, j] * (1.0 - Ov[t, j])
                dAg[t, j] = dg * (1.0 - Gv[t, j] * Gv[t, j])
                dc_next[j] = dc * Fv[t, j]
            for j in range(h):
                ai = 0.0
                for k in range(h):
                    ai += Uiv[k, j] * dAi[t, k]
                    ai += Ufv[k, j] * dAf[t, k]
                    ai += Uov[k, j] * dAo[t, k]
                    ai += Ugv[k, j] * dAg[t, k]
                dh_next[j] = ai
        for t in range(T):
            for j in range(h):
                ai = dAi[t, j]
                af = dAf[t, j]
                ao = dAo[t, j]
                ag = dAg[t, j]
                for k in range(d):
                    dX[t, k] += ai * Wiv[j, k] + af * Wfv[j, k] + ao * Wov[j, k] + ag * Wgv[j, k]
                    dWi[j, k] += ai * Xv[t, k]
                    dWf[j, k] += af * Xv[t, k]
                    dWo[j, k] += ao * Xv[t, k]
                    dWg[j, k] += ag * Xv[t, k]
                if t > 0:
                    for k in range(h):
                        dUi[j, k] += ai * Hv[t - 1, k]
                        dUf[j, k] += af * Hv[t - 1, k]
                        dUo[j, k] += ao * Hv[t - 1, k]
                        dUg[j, k] += ag * Hv[t - 1, k]
                dbi[j] += ai
                dbf[j] += af
                dbo[j] += ao
                dbg[j] += ag
    return (dX_arr, dWi_arr, dWf_arr, dWo_arr, dWg_arr,
            dUi_arr, dUf_arr, dUo_arr, dUg_arr,
            dbi_arr, dbf_arr, dbo_arr, dbg_arr)


def sgns_step(W_in, W_out, centers, contexts, negatives, lr):
    """Sequential in-place skip-gram negative-sampling updates.

    Same pair-by-pair update order as the fallback: positive row first,
    negatives in column order, center row last. Returns the summed pair loss.
    """
    cdef double[:, ::1] Win = W_in
    cdef double[:, ::1] Wout = W_out
    cdef long long[::1] cen = np.ascontiguousarray(centers, dtype=np.int64)
    cdef long long[::1] ctx = np.ascontiguousarray(contexts, dtype=np.int64)
    cdef long long[:, ::1] neg = np.ascontiguousarray(negatives, dtype=np.int64)
    cdef double alpha = lr

    cdef Py_ssize_t n = cen.shape[0]
    cdef Py_ssize_t k = neg.shape[1]
    cdef Py_ssize_t dim = Win.shape[1]
    cdef double[::1] dv = np.zeros(dim)

    cdef Py_ssize_t j, m, q
    cdef Py_ssize_t c, o, u
    cdef double x, g, total = 0.0
    with nogil:
        for j in range(n):
            c = cen[j]
            for q in range(dim):
                dv[q] = 0.0
            o = ctx[j]
            x = 0.0
            for q in range(dim):
                x += Win[c, q] * Wout[o, q]
            total += log1p(exp(-fabs(x))) + fmax(-x, 0.0)
            g = _sig(x) - 1.0
            for q in range(dim):
                dv[q] += g * Wout[o, q]
                Wout[o, q] -= alpha * g * Win[c, q]
            for m in range(k):
                u = neg[j, m]
                x = 0.0
                for q in range(dim):
                    x += Win[c, q] * Wout[u, q]
                total += log1p(exp(-fabs(x))) + fmax(x, 0.0)
                g = _sig(x)
                for q in range(dim):
                    dv[q] += g * Wout[u, q]
                    Wout[u, q] -= alpha * g * Win[c, q]
            for q in range(dim):
                Win[c, q] -= alpha * dv[q]
    return total
