"""Compare the numba and numpy kernel backends.

Times the LSTM forward/backward passes (the training hot path) and token
Levenshtein at sizes matching the bundled experiments. Run with:

    python benchmarks/bench_kernels.py

The active backend selection for the library itself is controlled by the
CSGEN_KERNELS environment variable; this script times both explicitly.
"""

import time

import numpy as np

from csgen import kernels


def time_fn(fn, *args, repeat=200, warmup=3):
    for _ in range(warmup):
        fn(*args)
    start = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - start) / repeat


def bench_lstm(backend_name, lstm_forward, lstm_backward, T=8, D=112, H=64, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((T, D))
    Wx = rng.uniform(-0.08, 0.08, (4 * H, D))
    Wh = rng.uniform(-0.08, 0.08, (4 * H, H))
    b = np.zeros(4 * H)
    h0 = np.zeros(H)
    c0 = np.zeros(H)
    fwd = time_fn(lstm_forward, x, Wx, Wh, b, h0, c0)
    hs, cs, gates = lstm_forward(x, Wx, Wh, b, h0, c0)
    d_hs = rng.standard_normal((T, H))
    bwd = time_fn(
        lstm_backward, x, Wx, Wh, gates, cs, hs, h0, c0, d_hs, np.zeros(H), np.zeros(H)
    )
    print(f"  lstm T={T} D={D} H={H}: forward {fwd * 1e6:8.1f} us   backward {bwd * 1e6:8.1f} us")
    return fwd, bwd


def bench_levenshtein(backend_name, levenshtein, n=12, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 5, n).astype(np.int64)
    b = rng.integers(0, 5, n).astype(np.int64)
    t = time_fn(levenshtein, a, b, repeat=2000)
    print(f"  levenshtein n={n}: {t * 1e6:8.1f} us")
    return t


def main():
    backends = ["numpy"]
    if kernels.HAS_NUMBA:
        backends.append("numba")
    else:
        print("numba not installed; timing numpy only")
    results = {}
    for name in backends:
        lstm_forward, lstm_backward, levenshtein = kernels.get_kernels(name)
        print(f"backend: {name}")
        fwd, bwd = bench_lstm(name, lstm_forward, lstm_backward)
        lev = bench_levenshtein(name, levenshtein)
        results[name] = (fwd, bwd, lev)
    if len(results) == 2:
        f_np, b_np, l_np = results["numpy"]
        f_nb, b_nb, l_nb = results["numba"]
        print(
            f"numba speedup: forward {f_np / f_nb:.1f}x, "
            f"backward {b_np / b_nb:.1f}x, levenshtein {l_np / l_nb:.1f}x"
        )


if __name__ == "__main__":
    main()
