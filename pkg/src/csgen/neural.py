"""Differentiable primitives with hand-derived exact gradients.

Double precision throughout, per-sentence processing (no padding). A Tape
records one forward pass as a sequential chain of ops; ``backward`` walks
it in reverse and returns parameter gradients plus the gradient on the
first op's input. Graphs that merge two branches (word + POS embeddings)
are recorded as a single op so the chain stays linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels


class NeuralError(Exception):
    pass


class TapeConsumedError(NeuralError):
    """backward() was called twice on the same tape."""


class ParamBlock:
    """Named float64 parameter arrays with frozen shapes."""

    def __init__(self, arrays: dict[str, np.ndarray]):
        self.arrays = {k: np.asarray(v, dtype=np.float64) for k, v in arrays.items()}
        for name, arr in self.arrays.items():
            if not np.all(np.isfinite(arr)):
                raise NeuralError(f"non-finite values in parameter {name!r}")
        self._shapes = {k: v.shape for k, v in self.arrays.items()}

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        value = np.asarray(value, dtype=np.float64)
        if name in self._shapes and value.shape != self._shapes[name]:
            raise NeuralError(
                f"shape mismatch for {name!r}: {value.shape} != {self._shapes[name]}"
            )
        self.arrays[name] = value
        self._shapes[name] = value.shape

    def __contains__(self, name: str) -> bool:
        return name in self.arrays

    def names(self) -> list[str]:
        return list(self.arrays)

    def copy(self) -> "ParamBlock":
        return ParamBlock({k: v.copy() for k, v in self.arrays.items()})

    def update(self, other: dict[str, np.ndarray]) -> None:
        for k, v in other.items():
            self[k] = v

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.arrays.items()}


CHECKPOINT_VERSION = 1


def save_params(path, params: ParamBlock, meta: dict[str, str] | None = None) -> None:
    """Write a self-describing checkpoint (exact float64 round-trip)."""
    payload = {f"param/{k}": v for k, v in params.arrays.items()}
    payload["__format_version__"] = np.int64(CHECKPOINT_VERSION)
    for k, v in (meta or {}).items():
        payload[f"meta/{k}"] = np.str_(v)
    np.savez(path, **payload)


def load_params(path) -> tuple[ParamBlock, dict[str, str]]:
    with np.load(path, allow_pickle=False) as data:
        version = int(data["__format_version__"])
        if version != CHECKPOINT_VERSION:
            raise NeuralError(f"unsupported checkpoint version {version}")
        arrays = {}
        meta = {}
        for key in data.files:
            if key.startswith("param/"):
                arrays[key[len("param/") :]] = data[key]
            elif key.startswith("meta/"):
                meta[key[len("meta/") :]] = str(data[key])
    return ParamBlock(arrays), meta


# Initialization: small uniform weights, +1 forget-gate bias (helps short
# corpora), slightly wider range for embeddings.
WEIGHT_SCALE = 0.08
EMBED_SCALE = 0.1


def init_dense(rng: np.random.Generator, out_dim: int, in_dim: int) -> dict[str, np.ndarray]:
    return {
        "W": rng.uniform(-WEIGHT_SCALE, WEIGHT_SCALE, size=(out_dim, in_dim)),
        "b": np.zeros(out_dim),
    }


def init_lstm(rng: np.random.Generator, input_dim: int, hidden_dim: int) -> dict[str, np.ndarray]:
    b = np.zeros(4 * hidden_dim)
    b[hidden_dim : 2 * hidden_dim] = 1.0
    return {
        "Wx": rng.uniform(-WEIGHT_SCALE, WEIGHT_SCALE, size=(4 * hidden_dim, input_dim)),
        "Wh": rng.uniform(-WEIGHT_SCALE, WEIGHT_SCALE, size=(4 * hidden_dim, hidden_dim)),
        "b": b,
    }


def init_embedding(rng: np.random.Generator, n_rows: int, dim: int) -> np.ndarray:
    return rng.uniform(-EMBED_SCALE, EMBED_SCALE, size=(n_rows, dim))


class Tape:
    """Sequential record of one forward pass."""

    def __init__(self):
        self._ops: list = []
        self._consumed = False

    def record(self, backward_fn) -> None:
        self._ops.append(backward_fn)

    def backward(self, upstream) -> tuple[dict[str, np.ndarray], np.ndarray | None]:
        """Walk the recorded ops in reverse.

        Returns (parameter gradients keyed like the ParamBlock, gradient on
        the first op's input or None for lookup-style first ops).
        """
        if self._consumed:
            raise TapeConsumedError("tape already consumed by a backward pass")
        self._consumed = True
        grads: dict[str, np.ndarray] = {}
        d = upstream
        for op in reversed(self._ops):
            d = op(d, grads)
        return grads, d


def _accum(grads: dict, name: str, value: np.ndarray) -> None:
    if name in grads:
        grads[name] += value
    else:
        grads[name] = value


def embed_forward(params: ParamBlock, name: str, ids, tape: Tape | None) -> np.ndarray:
    """Row lookup: ids (T,) -> (T, dim)."""
    table = params[name]
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size == 0:
        raise NeuralError("empty id sequence")
    if ids.min() < 0 or ids.max() >= table.shape[0]:
        raise IndexError(f"embedding id out of range for {name!r}")
    out = table[ids]

    if tape is not None:
        def backward(d_out, grads):
            d_table = np.zeros_like(table)
            np.add.at(d_table, ids, d_out)
            _accum(grads, name, d_table)
            return None

        tape.record(backward)
    return out


def embed_pair_forward(
    params: ParamBlock,
    word_name: str,
    pos_name: str,
    word_ids,
    pos_ids,
    tape: Tape | None,
) -> np.ndarray:
    """Concatenated word + POS embeddings as one recorded op."""
    word_table = params[word_name]
    pos_table = params[pos_name]
    word_ids = np.asarray(word_ids, dtype=np.int64)
    pos_ids = np.asarray(pos_ids, dtype=np.int64)
    out = np.concatenate([word_table[word_ids], pos_table[pos_ids]], axis=1)

    if tape is not None:
        dw = word_table.shape[1]

        def backward(d_out, grads):
            d_word = np.zeros_like(word_table)
            d_pos = np.zeros_like(pos_table)
            np.add.at(d_word, word_ids, d_out[:, :dw])
            np.add.at(d_pos, pos_ids, d_out[:, dw:])
            _accum(grads, word_name, d_word)
            _accum(grads, pos_name, d_pos)
            return None

        tape.record(backward)
    return out


def lstm_dir_forward(
    params: ParamBlock, prefix: str, x: np.ndarray, tape: Tape | None
) -> np.ndarray:
    """One LSTM direction over (T, D); returns hidden states (T, H)."""
    Wx, Wh, b = params[f"{prefix}.Wx"], params[f"{prefix}.Wh"], params[f"{prefix}.b"]
    if x.shape[0] == 0:
        raise NeuralError("empty input sequence")
    if not np.all(np.isfinite(x)):
        raise NeuralError("non-finite LSTM input")
    H = Wh.shape[1]
    h0 = np.zeros(H)
    c0 = np.zeros(H)
    x = np.ascontiguousarray(x)
    hs, cs, gates = kernels.lstm_forward(x, Wx, Wh, b, h0, c0)

    if tape is not None:
        def backward(d_hs, grads):
            dx, dWx, dWh, db, _, _ = kernels.lstm_backward(
                x, Wx, Wh, gates, cs, hs, h0, c0,
                np.ascontiguousarray(d_hs), np.zeros(H), np.zeros(H),
            )
            _accum(grads, f"{prefix}.Wx", dWx)
            _accum(grads, f"{prefix}.Wh", dWh)
            _accum(grads, f"{prefix}.b", db)
            return dx

        tape.record(backward)
    return hs


def blstm_forward(
    params: ParamBlock, prefix: str, x: np.ndarray, tape: Tape | None
) -> np.ndarray:
    """Bidirectional LSTM; output (T, 2H) is [forward ; backward] per step.

    The forward direction's final state is row T-1 of the first half, the
    backward direction's final state is row 0 of the second half.
    """
    Wxf = params[f"{prefix}.fwd.Wx"]
    H = params[f"{prefix}.fwd.Wh"].shape[1]
    if x.shape[1] != Wxf.shape[1]:
        raise NeuralError(
            f"BLSTM input dim {x.shape[1]} != expected {Wxf.shape[1]}"
        )
    t_f = Tape() if tape is not None else None
    t_b = Tape() if tape is not None else None
    hs_f = lstm_dir_forward(params, f"{prefix}.fwd", x, t_f)
    x_rev = np.ascontiguousarray(x[::-1])
    hs_b_rev = lstm_dir_forward(params, f"{prefix}.bwd", x_rev, t_b)
    out = np.concatenate([hs_f, hs_b_rev[::-1]], axis=1)

    if tape is not None:
        def backward(d_out, grads):
            g_f, dx_f = t_f.backward(np.ascontiguousarray(d_out[:, :H]))
            g_b, dx_b_rev = t_b.backward(np.ascontiguousarray(d_out[::-1, H:]))
            for k, v in g_f.items():
                _accum(grads, k, v)
            for k, v in g_b.items():
                _accum(grads, k, v)
            return dx_f + dx_b_rev[::-1]

        tape.record(backward)
    return out


def dense_forward(
    params: ParamBlock,
    prefix: str,
    x: np.ndarray,
    tape: Tape | None,
    activation: str = "sigmoid",
) -> np.ndarray:
    """Row-wise affine map with optional sigmoid: (T, D) -> (T, O).

    A 1-D input is treated as a single row and returns a 1-D output; with
    O == 1 that output is a scalar array of shape ().
    """
    W, b = params[f"{prefix}.W"], params[f"{prefix}.b"]
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != W.shape[1]:
        raise NeuralError(f"dense input dim {X.shape[1]} != {W.shape[1]}")
    z = X @ W.T + b
    if activation == "sigmoid":
        out = 1.0 / (1.0 + np.exp(-z))
    elif activation == "tanh":
        out = np.tanh(z)
    elif activation == "none":
        out = z
    else:
        raise ValueError(f"unknown activation {activation!r}")

    if tape is not None:
        def backward(d_out, grads):
            d_out = np.asarray(d_out, dtype=np.float64)
            if d_out.ndim < 2:
                d_out = d_out.reshape(z.shape)
            if activation == "sigmoid":
                dz = d_out * out * (1.0 - out)
            elif activation == "tanh":
                dz = d_out * (1.0 - out * out)
            else:
                dz = d_out
            _accum(grads, f"{prefix}.W", dz.T @ X)
            _accum(grads, f"{prefix}.b", dz.sum(axis=0))
            dX = dz @ W
            return dX[0] if single else dX

        tape.record(backward)
    y = out[0] if single else out
    if W.shape[0] == 1:
        y = y.squeeze(-1)
    return y


def dropout_forward(
    x: np.ndarray,
    rate: float,
    rng: np.random.Generator | None,
    mode: str,
    tape: Tape | None,
) -> np.ndarray:
    """Inverted dropout: train mode zeroes units with probability ``rate``
    and scales survivors by 1/(1-rate); eval mode is the identity."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must be in [0, 1)")
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown dropout mode {mode!r}")
    if mode == "eval" or rate == 0.0:
        if tape is not None:
            tape.record(lambda d_out, grads: d_out)
        return x
    if rng is None:
        raise ValueError("train-mode dropout needs an rng")
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    out = x * keep
    if tape is not None:
        tape.record(lambda d_out, grads: d_out * keep)
    return out


def append_const_cols(x: np.ndarray, cols: np.ndarray, tape: Tape | None) -> np.ndarray:
    """Append constant columns (e.g. a noise vector broadcast per row)."""
    if cols.ndim == 1:
        cols = np.broadcast_to(cols, (x.shape[0], cols.shape[0]))
    out = np.concatenate([x, cols], axis=1)
    if tape is not None:
        d = x.shape[1]
        tape.record(lambda d_out, grads: d_out[:, :d])
    return out


def pool_finals(hs: np.ndarray, tape: Tape | None) -> np.ndarray:
    """Concatenate both directions' final states from a BLSTM output."""
    H = hs.shape[1] // 2
    out = np.concatenate([hs[-1, :H], hs[0, H:]])
    if tape is not None:
        def backward(d_out, grads):
            d_hs = np.zeros_like(hs)
            d_hs[-1, :H] = d_out[:H]
            d_hs[0, H:] = d_out[H:]
            return d_hs

        tape.record(backward)
    return out


def mean_pool(hs: np.ndarray, tape: Tape | None) -> np.ndarray:
    """Mean over time of the BLSTM output (config alternative to finals)."""
    out = hs.mean(axis=0)
    if tape is not None:
        T = hs.shape[0]
        tape.record(lambda d_out, grads: np.broadcast_to(d_out / T, hs.shape).copy())
    return out


def backward(tape: Tape, upstream) -> tuple[dict[str, np.ndarray], np.ndarray | None]:
    """Reverse-mode gradients for a recorded forward pass."""
    return tape.backward(np.asarray(upstream, dtype=np.float64))


@dataclass
class AdamState:
    """Per-parameter first/second moments plus hyperparameters.

    ``scales`` optionally multiplies the step size for individual
    parameters (e.g. to update a shared encoder more slowly than a head).
    """

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    step_size: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    scales: dict[str, float] | None = None

    @classmethod
    def for_params(cls, params: ParamBlock, names: list[str] | None = None,
                   step_size: float = 1e-3, **kwargs) -> "AdamState":
        names = params.names() if names is None else names
        return cls(
            m={k: np.zeros_like(params[k]) for k in names},
            v={k: np.zeros_like(params[k]) for k in names},
            step_size=step_size,
            **kwargs,
        )


def adam_step(params: ParamBlock, grads: dict[str, np.ndarray], state: AdamState) -> None:
    """Bias-corrected Adam update on the parameters covered by the state.

    Parameters without a gradient this step are left untouched (their
    moments do not decay either, keeping sparse update semantics simple).
    """
    state.t += 1
    b1t = 1.0 - state.beta1 ** state.t
    b2t = 1.0 - state.beta2 ** state.t
    for name in state.m:
        if name not in grads:
            continue
        g = grads[name]
        if not np.all(np.isfinite(g)):
            raise NeuralError(f"non-finite gradient for parameter {name!r}")
        state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * g * g
        m_hat = state.m[name] / b1t
        v_hat = state.v[name] / b2t
        step = state.step_size
        if state.scales is not None:
            step = step * state.scales.get(name, 1.0)
        params[name] = params[name] - step * m_hat / (np.sqrt(v_hat) + state.eps)


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients in place so their global L2 norm is <= max_norm."""
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g * g))
    norm = float(np.sqrt(total))
    if norm > max_norm > 0.0:
        scale = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * scale
    return norm


def grad_check(
    loss_and_grads,
    params: ParamBlock,
    eps: float = 1e-5,
    n_samples: int = 6,
    rng: np.random.Generator | None = None,
    names: list[str] | None = None,
    floor: float = 1e-4,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_and_grads(params)`` must return (scalar loss, grads dict) and be
    deterministic. Coordinates are sampled per parameter array. ``floor``
    is the denominator floor of the relative error; it must sit above the
    finite-difference noise (~1e-11 absolute in double precision at
    eps=1e-5), otherwise coordinates whose true gradient is below FD
    resolution drown the check in noise.
    """
    rng = rng or np.random.default_rng(0)
    _, analytic = loss_and_grads(params)
    names = names if names is not None else list(analytic)
    worst = 0.0
    for name in names:
        arr = params[name]
        flat_grad = np.asarray(analytic[name]).ravel()
        n_coords = min(n_samples, arr.size)
        coords = rng.choice(arr.size, size=n_coords, replace=False)
        for idx in coords:
            orig = arr.flat[idx]
            arr.flat[idx] = orig + eps
            lo_plus, _ = loss_and_grads(params)
            arr.flat[idx] = orig - eps
            lo_minus, _ = loss_and_grads(params)
            arr.flat[idx] = orig
            cd = (lo_plus - lo_minus) / (2.0 * eps)
            a = flat_grad[idx]
            rel = abs(a - cd) / max(abs(a), abs(cd), floor)
            worst = max(worst, rel)
    return worst
