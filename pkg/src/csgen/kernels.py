"""Hot numeric kernels: LSTM time-step loops and token edit distance.

Each kernel has a single numpy implementation; when numba is installed it
is JIT-compiled, otherwise the plain version runs. The backend is chosen
once at import from the CSGEN_KERNELS environment variable:

    CSGEN_KERNELS=numba   force JIT (raises if numba is missing)
    CSGEN_KERNELS=numpy   force the pure-numpy fallback
    unset / auto          numba when importable, else numpy

``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via CSGEN_KERNELS=numpy
    njit = None
    HAS_NUMBA = False

ENV_VAR = "CSGEN_KERNELS"


def _lstm_forward(x, Wx, Wh, b, h0, c0):
    """Run one LSTM direction over a (T, D) input.

    The input projection is one matrix product for the whole sequence;
    only the recurrent part runs step by step. Gate layout along the 4H
    axis is [input, forget, output, candidate]. Returns per-step hidden
    states (T, H), cell states (T, H) and the post-activation gates
    (T, 4H) needed for the backward pass.
    """
    T = x.shape[0]
    H = h0.shape[0]
    xw = np.dot(x, Wx.T)
    WhT = np.ascontiguousarray(Wh.T)
    hs = np.zeros((T, H))
    cs = np.zeros((T, H))
    gates = np.zeros((T, 4 * H))
    h = h0.copy()
    c = c0.copy()
    for t in range(T):
        z = xw[t] + np.dot(h, WhT) + b
        i = 1.0 / (1.0 + np.exp(-z[:H]))
        f = 1.0 / (1.0 + np.exp(-z[H : 2 * H]))
        o = 1.0 / (1.0 + np.exp(-z[2 * H : 3 * H]))
        g = np.tanh(z[3 * H :])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[t, :H] = i
        gates[t, H : 2 * H] = f
        gates[t, 2 * H : 3 * H] = o
        gates[t, 3 * H :] = g
        cs[t] = c
        hs[t] = h
    return hs, cs, gates


def _lstm_backward(x, Wx, Wh, gates, cs, hs, h0, c0, d_hs, d_h_last, d_c_last):
    """Exact reverse-mode pass matching _lstm_forward.

    d_hs is the upstream gradient on every per-step hidden state;
    d_h_last / d_c_last are extra gradients on the final states. The
    recurrent loop only produces the per-step pre-activation gradients;
    all weight gradients are whole-sequence matrix products.
    Returns (dx, dWx, dWh, db, dh0, dc0).
    """
    T = x.shape[0]
    H = h0.shape[0]
    dz_all = np.zeros((T, 4 * H))
    dh_carry = d_h_last.copy()
    dc = d_c_last.copy()
    for t in range(T - 1, -1, -1):
        i = gates[t, :H]
        f = gates[t, H : 2 * H]
        o = gates[t, 2 * H : 3 * H]
        g = gates[t, 3 * H :]
        c_prev = cs[t - 1] if t > 0 else c0
        dh = d_hs[t] + dh_carry
        tanc = np.tanh(cs[t])
        do = dh * tanc
        dc = dc + dh * o * (1.0 - tanc * tanc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dz_all[t, :H] = di * i * (1.0 - i)
        dz_all[t, H : 2 * H] = df * f * (1.0 - f)
        dz_all[t, 2 * H : 3 * H] = do * o * (1.0 - o)
        dz_all[t, 3 * H :] = dg * (1.0 - g * g)
        dh_carry = np.dot(dz_all[t], Wh)
        dc = dc * f
    h_prev = np.zeros((T, H))
    h_prev[0] = h0
    h_prev[1:] = hs[: T - 1]
    dWx = np.dot(dz_all.T, x)
    dWh = np.dot(dz_all.T, h_prev)
    db = dz_all.sum(axis=0)
    dx = np.dot(dz_all, Wx)
    return dx, dWx, dWh, db, dh_carry, dc


def _levenshtein(a, b):
    """Unit-cost token edit distance between two int id sequences."""
    n = a.shape[0]
    m = b.shape[0]
    prev = np.arange(m + 1)
    cur = np.zeros(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            if prev[j - 1] + cost < best:
                best = prev[j - 1] + cost
            cur[j] = best
        prev, cur = cur, prev
    return int(prev[m])


def _select_backend() -> str:
    choice = os.environ.get(ENV_VAR, "auto").lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise ImportError(
                f"{ENV_VAR}=numba requested but numba is not installed"
            )
        return "numba"
    if choice not in ("auto", ""):
        raise ValueError(f"unknown {ENV_VAR} value {choice!r}")
    return "numba" if HAS_NUMBA else "numpy"


def get_kernels(backend: str):
    """Return (lstm_forward, lstm_backward, levenshtein) for a backend."""
    if backend == "numpy":
        return _lstm_forward, _lstm_backward, _levenshtein
    if backend == "numba":
        if not HAS_NUMBA:
            raise ImportError("numba backend requested but numba is missing")
        jit = njit(cache=True, fastmath=False)
        return jit(_lstm_forward), jit(_lstm_backward), jit(_levenshtein)
    raise ValueError(f"unknown backend {backend!r}")


BACKEND = _select_backend()
lstm_forward, lstm_backward, levenshtein = get_kernels(BACKEND)


def levenshtein_tokens(a, b) -> int:
    """Edit distance between two token-string sequences."""
    ids: dict[str, int] = {}
    a_ids = np.array([ids.setdefault(t, len(ids)) for t in a], dtype=np.int64)
    b_ids = np.array([ids.setdefault(t, len(ids)) for t in b], dtype=np.int64)
    if len(a_ids) == 0:
        return len(b_ids)
    if len(b_ids) == 0:
        return len(a_ids)
    return int(levenshtein(a_ids, b_ids))
