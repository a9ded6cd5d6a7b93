"""The two kernel backends must be interchangeable: same contracts, results
equal to tight tolerance, and both validated against step-by-step references."""

import numpy as np
import numpy.testing as npt
import pytest

from diedat import _kernels_py, kernels
from diedat.embedding import pair_loss_grads
from diedat.model import LstmCellParams, lstm_step
from diedat.tensor import make_rng

try:
    from diedat import _kernels
    BACKENDS = [("python", _kernels_py), ("cython", _kernels)]
except ImportError:
    _kernels = None
    BACKENDS = [("python", _kernels_py)]


def _random_cell(rng, d, h):
    arrays = {}
    for g in "ifog":
        arrays[f"W{g}"] = rng.normal(scale=0.4, size=(h, d))
        arrays[f"U{g}"] = rng.normal(scale=0.4, size=(h, h))
        arrays[f"b{g}"] = rng.normal(scale=0.2, size=h)
    return LstmCellParams(**arrays)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_lstm_forward_matches_step_reference(name, impl):
    rng = make_rng(10)
    for _ in range(5):
        T, d, h = rng.integers(1, 9), rng.integers(1, 7), rng.integers(1, 6)
        cell = _random_cell(rng, d, h)
        X = rng.normal(size=(T, d))
        H, C, I, F, O, G = impl.lstm_forward(X, *cell.arrays())
        h_prev, c_prev = np.zeros(h), np.zeros(h)
        for t in range(T):
            h_t, c_t = lstm_step(cell, X[t], h_prev, c_prev)
            npt.assert_allclose(H[t], h_t, rtol=1e-12, atol=1e-14)
            npt.assert_allclose(C[t], c_t, rtol=1e-12, atol=1e-14)
            h_prev, c_prev = h_t, c_t


@pytest.mark.skipif(_kernels is None, reason="compiled extension not built")
def test_backends_agree_lstm():
    rng = make_rng(11)
    for _ in range(5):
        T, d, h = rng.integers(1, 12), rng.integers(1, 9), rng.integers(1, 7)
        cell = _random_cell(rng, d, h)
        X = rng.normal(size=(T, d))
        outs_p = _kernels_py.lstm_forward(X, *cell.arrays())
        outs_c = _kernels.lstm_forward(X, *cell.arrays())
        for a, b in zip(outs_p, outs_c):
            npt.assert_allclose(a, b, rtol=1e-10, atol=1e-13)
        dH = rng.normal(size=(T, h))
        grads_p = _kernels_py.lstm_backward(dH, X, *outs_p, *cell.weight_arrays())
        grads_c = _kernels.lstm_backward(dH, X, *outs_c, *cell.weight_arrays())
        for a, b in zip(grads_p, grads_c):
            npt.assert_allclose(a, b, rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_lstm_backward_finite_differences(name, impl):
    rng = make_rng(12)
    T, d, h = 5, 4, 3
    cell = _random_cell(rng, d, h)
    X = rng.normal(size=(T, d))
    readout = rng.normal(size=(T, h))

    def loss(Xv, c):
        H = impl.lstm_forward(Xv, *c.arrays())[0]
        return float((readout * H).sum())

    outs = impl.lstm_forward(X, *cell.arrays())
    grads = impl.lstm_backward(readout, X, *outs, *cell.weight_arrays())
    arrays = (X,) + cell.arrays()
    eps = 1e-6
    for arr, ana in zip(arrays, grads):
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + eps
            lp = loss(X, cell)
            arr[idx] = orig - eps
            lm = loss(X, cell)
            arr[idx] = orig
            numeric = (lp - lm) / (2 * eps)
            assert abs(ana[idx] - numeric) / max(abs(ana[idx]), abs(numeric), 1e-8) < 1e-5


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_sgns_step_matches_pair_reference(name, impl):
    rng = make_rng(13)
    V, dim, k = 9, 5, 3
    W_in = rng.normal(scale=0.2, size=(V, dim))
    W_out = rng.normal(scale=0.2, size=(V, dim))
    center, context = 4, 6
    negs = np.array([[2, 7, 3]], dtype=np.int64)
    lr = 0.07

    loss_ref, dv, du_pos, dU_neg = pair_loss_grads(W_in[center], W_out[context], W_out[negs[0]])
    exp_in = W_in.copy()
    exp_out = W_out.copy()
    exp_out[context] -= lr * du_pos
    for m, u in enumerate(negs[0]):
        exp_out[u] -= lr * dU_neg[m]
    exp_in[center] -= lr * dv

    got_in = W_in.copy()
    got_out = W_out.copy()
    loss = impl.sgns_step(got_in, got_out,
                          np.array([center], dtype=np.int64),
                          np.array([context], dtype=np.int64), negs, lr)
    npt.assert_allclose(loss, loss_ref, rtol=1e-12)
    npt.assert_allclose(got_in, exp_in, rtol=1e-12, atol=1e-15)
    npt.assert_allclose(got_out, exp_out, rtol=1e-12, atol=1e-15)


@pytest.mark.skipif(_kernels is None, reason="compiled extension not built")
def test_backends_agree_sgns():
    rng = make_rng(14)
    V, dim, n, k = 15, 8, 60, 5
    W_in = rng.normal(scale=0.1, size=(V, dim))
    W_out = rng.normal(scale=0.1, size=(V, dim))
    centers = rng.integers(2, V, size=n)
    contexts = rng.integers(2, V, size=n)
    negs = rng.integers(2, V, size=(n, k))
    a_in, a_out = W_in.copy(), W_out.copy()
    b_in, b_out = W_in.copy(), W_out.copy()
    la = _kernels_py.sgns_step(a_in, a_out, centers, contexts, negs, 0.05)
    lb = _kernels.sgns_step(b_in, b_out, centers, contexts, negs, 0.05)
    npt.assert_allclose(la, lb, rtol=1e-12)
    npt.assert_allclose(a_in, b_in, rtol=1e-12, atol=1e-15)
    npt.assert_allclose(a_out, b_out, rtol=1e-12, atol=1e-15)


def test_active_backend_exports():
    assert kernels.BACKEND in ("python", "cython")
    assert callable(kernels.lstm_forward)
    assert callable(kernels.lstm_backward)
    assert callable(kernels.sgns_step)
