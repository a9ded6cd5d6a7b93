"""NumPy implementation of the training hot loops.

``diedat.kernels`` prefers the compiled extension (``diedat._kernels``) and
falls back to this module; both expose the same three functions with the same
semantics. All float arrays are C-contiguous float64. LSTM weights follow the
gate order (i, f, o, g): input gate, forget gate, output gate, candidate.
"""

import numpy as np


def _sigmoid(x):
    # tanh form stays finite for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def lstm_forward(X, Wi, Wf, Wo, Wg, Ui, Uf, Uo, Ug, bi, bf, bo, bg):
    """Run one LSTM direction over X[T, d] from zero initial state.

    Returns (H, C, I, F, O, G), each [T, h]: hidden states, cell states and
    post-activation gates. The full tuple is the cache lstm_backward needs.
    """
    T = X.shape[0]
    h = bi.shape[0]
    Ai = X @ Wi.T + bi
    Af = X @ Wf.T + bf
    Ao = X @ Wo.T + bo
    Ag = X @ Wg.T + bg
    H = np.empty((T, h))
    C = np.empty((T, h))
    I = np.empty((T, h))
    F = np.empty((T, h))
    O = np.empty((T, h))
    G = np.empty((T, h))
    h_prev = np.zeros(h)
    c_prev = np.zeros(h)
    for t in range(T):
        i_t = _sigmoid(Ai[t] + Ui @ h_prev)
        f_t = _sigmoid(Af[t] + Uf @ h_prev)
        o_t = _sigmoid(Ao[t] + Uo @ h_prev)
        g_t = np.tanh(Ag[t] + Ug @ h_prev)
        c_t = f_t * c_prev + i_t * g_t
        h_t = o_t * np.tanh(c_t)
        I[t] = i_t
        F[t] = f_t
        O[t] = o_t
        G[t] = g_t
        C[t] = c_t
        H[t] = h_t
        h_prev = h_t
        c_prev = c_t
    return H, C, I, F, O, G


def lstm_backward(dH, X, H, C, I, F, O, G, Wi, Wf, Wo, Wg, Ui, Uf, Uo, Ug):
    """Backpropagate through lstm_forward.

    dH[T, h] is the loss gradient w.r.t. every hidden state row. Returns
    (dX, dWi, dWf, dWo, dWg, dUi, dUf, dUo, dUg, dbi, dbf, dbo, dbg).
    """
    T, h = dH.shape
    # pre-activation gradients per step, collected for one GEMM per weight
    dAi = np.empty((T, h))
    dAf = np.empty((T, h))
    dAo = np.empty((T, h))
    dAg = np.empty((T, h))
    dh_next = np.zeros(h)
    dc_next = np.zeros(h)
    for t in range(T - 1, -1, -1):
        dh = dH[t] + dh_next
        tc = np.tanh(C[t])
        dc = dc_next + dh * O[t] * (1.0 - tc * tc)
        c_prev = C[t - 1] if t > 0 else 0.0
        di = dc * G[t]
        df = dc * c_prev
        do = dh * tc
        dg = dc * I[t]
        dAi[t] = di * I[t] * (1.0 - I[t])
        dAf[t] = df * F[t] * (1.0 - F[t])
        dAo[t] = do * O[t] * (1.0 - O[t])
        dAg[t] = dg * (1.0 - G[t] * G[t])
        dh_next = Ui.T @ dAi[t] + Uf.T @ dAf[t] + Uo.T @ dAo[t] + Ug.T @ dAg[t]
        dc_next = dc * F[t]
    dX = dAi @ Wi + dAf @ Wf + dAo @ Wo + dAg @ Wg
    dWi = dAi.T @ X
    dWf = dAf.T @ X
    dWo = dAo.T @ X
    dWg = dAg.T @ X
    # recurrent weights only see h_0..h_{T-2}; h before t=0 is zero
    Hp = H[:-1]
    dUi = dAi[1:].T @ Hp
    dUf = dAf[1:].T @ Hp
    dUo = dAo[1:].T @ Hp
    dUg = dAg[1:].T @ Hp
    dbi = dAi.sum(axis=0)
    dbf = dAf.sum(axis=0)
    dbo = dAo.sum(axis=0)
    dbg = dAg.sum(axis=0)
    return dX, dWi, dWf, dWo, dWg, dUi, dUf, dUo, dUg, dbi, dbf, dbo, dbg


def sgns_step(W_in, W_out, centers, contexts, negatives, lr):
    """Sequential in-place skip-gram negative-sampling updates.

    centers[n], contexts[n] and negatives[n, k] are int64 vocabulary indices.
    Pair j trains center row W_in[centers[j]] against the positive context row
    and k negative rows of W_out with learning rate lr. Returns the summed
    pair loss, computed before each update.
    """
    n, k = negatives.shape
    total = 0.0
    for j in range(n):
        c = centers[j]
        v = W_in[c]
        dv = np.zeros_like(v)
        o = contexts[j]
        x = float(v @ W_out[o])
        # -log sigmoid(x) via softplus(-x)
        total += np.log1p(np.exp(-abs(x))) + max(-x, 0.0)
        g = _sigmoid(x) - 1.0
        dv += g * W_out[o]
        W_out[o] -= lr * g * v
        for m in range(k):
            u = negatives[j, m]
            x = float(v @ W_out[u])
            total += np.log1p(np.exp(-abs(x))) + max(x, 0.0)
            g = _sigmoid(x)
            dv += g * W_out[u]
            W_out[u] -= lr * g * v
        W_in[c] -= lr * dv
    return total
