"""Compare the compiled kernels against the NumPy fallback.

Run as `python benchmarks/bench_kernels.py`. Times the LSTM sequence
forward/backward at classifier-realistic shapes and the skip-gram update
loop, and reports the speedup of the compiled extension.
"""

import time

import numpy as np

from diedat import _kernels_py

try:
    from diedat import _kernels
except ImportError:
    _kernels = None


def _timeit(fn, repeats):
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def bench_lstm(impl, T, d, h, repeats=200):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(T, d))
    Ws = [rng.normal(scale=0.3, size=(h, d)) for _ in range(4)]
    Us = [rng.normal(scale=0.3, size=(h, h)) for _ in range(4)]
    bs = [np.zeros(h) for _ in range(4)]
    dH = rng.normal(size=(T, h))
    outs = impl.lstm_forward(X, *Ws, *Us, *bs)
    fwd = _timeit(lambda: impl.lstm_forward(X, *Ws, *Us, *bs), repeats)
    bwd = _timeit(lambda: impl.lstm_backward(dH, X, *outs, *Ws, *Us), repeats)
    return fwd, bwd


def bench_sgns(impl, V=2000, dim=100, n=500, k=5, repeats=20):
    rng = np.random.default_rng(1)
    W_in = rng.normal(scale=0.1, size=(V, dim))
    W_out = rng.normal(scale=0.1, size=(V, dim))
    centers = rng.integers(2, V, size=n)
    contexts = rng.integers(2, V, size=n)
    negs = rng.integers(2, V, size=(n, k))
    return _timeit(lambda: impl.sgns_step(W_in.copy(), W_out.copy(),
                                          centers, contexts, negs, 0.01), repeats)


def main():
    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    shapes = [(11, 100, 32), (11, 200, 32), (40, 100, 32)]
    results = {}
    for name, impl in backends:
        rows = {}
        for T, d, h in shapes:
            rows[(T, d, h)] = bench_lstm(impl, T, d, h)
        rows["sgns"] = bench_sgns(impl)
        results[name] = rows

    print(f"{'kernel':<28} " + "".join(f"{n:>12} " for n in results)
          + ("{:>9}".format("speedup") if len(results) == 2 else ""))
    def line(label, pick):
        vals = [pick(results[n]) for n in results]
        row = f"{label:<28} " + "".join(f"{v * 1e6:>10.1f}us " for v in vals)
        if len(vals) == 2:
            row += f"{vals[0] / vals[1]:>8.1f}x"
        print(row)

    for T, d, h in shapes:
        line(f"lstm_forward  T={T} d={d} h={h}", lambda r, k=(T, d, h): r[k][0])
        line(f"lstm_backward T={T} d={d} h={h}", lambda r, k=(T, d, h): r[k][1])
    line("sgns_step n=500 k=5 d=100", lambda r: r["sgns"])
    if _kernels is None:
        print("\ncompiled extension not available; showing the fallback only")


if __name__ == "__main__":
    main()
