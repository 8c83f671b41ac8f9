import numpy as np
import pytest

from csgen import kernels, neural
from csgen.neural import (
    AdamState,
    NeuralError,
    ParamBlock,
    Tape,
    TapeConsumedError,
    adam_step,
    clip_global_norm,
    grad_check,
    load_params,
    save_params,
)


def make_blstm_params(rng, in_dim, hidden):
    arrays = {}
    for d in ("fwd", "bwd"):
        for k, v in neural.init_lstm(rng, in_dim, hidden).items():
            arrays[f"blstm.{d}.{k}"] = v
    return arrays


class TestEmbed:
    def test_row_lookup(self, rng):
        params = ParamBlock({"e": neural.init_embedding(rng, 5, 3)})
        out = neural.embed_forward(params, "e", [2], None)
        assert np.array_equal(out[0], params["e"][2])

    def test_equal_ids_equal_rows(self, rng):
        params = ParamBlock({"e": neural.init_embedding(rng, 5, 3)})
        out = neural.embed_forward(params, "e", [1, 1], None)
        assert np.array_equal(out[0], out[1])

    def test_out_of_range(self, rng):
        params = ParamBlock({"e": neural.init_embedding(rng, 5, 3)})
        with pytest.raises(IndexError):
            neural.embed_forward(params, "e", [5], None)

    def test_grad_is_multiplicity(self, rng):
        params = ParamBlock({"e": neural.init_embedding(rng, 4, 3)})
        ids = [1, 1, 2]

        def f(p):
            tape = Tape()
            out = neural.embed_forward(p, "e", ids, tape)
            grads, _ = tape.backward(np.ones_like(out))
            return float(out.sum()), grads

        assert grad_check(f, params, n_samples=12) < 1e-5
        _, grads = f(params)
        assert np.allclose(grads["e"][1], 2.0)
        assert np.allclose(grads["e"][2], 1.0)
        assert np.allclose(grads["e"][0], 0.0)


class TestBlstm:
    def test_length_one(self, rng):
        params = ParamBlock(make_blstm_params(rng, 3, 2))
        out = neural.blstm_forward(params, "blstm", rng.standard_normal((1, 3)), None)
        assert out.shape == (1, 4)

    def test_zero_weights_zero_hiddens(self):
        arrays = {}
        for d in ("fwd", "bwd"):
            arrays[f"blstm.{d}.Wx"] = np.zeros((8, 3))
            arrays[f"blstm.{d}.Wh"] = np.zeros((8, 2))
            arrays[f"blstm.{d}.b"] = np.zeros(8)
        params = ParamBlock(arrays)
        out = neural.blstm_forward(params, "blstm", np.ones((4, 3)), None)
        assert np.array_equal(out, np.zeros((4, 4)))

    def test_nonfinite_input_rejected(self, rng):
        params = ParamBlock(make_blstm_params(rng, 3, 2))
        bad = np.full((2, 3), np.nan)
        with pytest.raises(NeuralError):
            neural.blstm_forward(params, "blstm", bad, None)

    @pytest.mark.parametrize("seed", range(20))
    def test_gradients_match_finite_differences(self, seed):
        r = np.random.default_rng(seed)
        params = ParamBlock(make_blstm_params(r, 3, 2))
        x = r.standard_normal((3, 3))
        upstream = r.standard_normal((3, 4))

        def f(p):
            tape = Tape()
            hs = neural.blstm_forward(p, "blstm", x, tape)
            grads, _ = tape.backward(upstream)
            return float(np.sum(upstream * hs)), grads

        assert grad_check(f, params, rng=np.random.default_rng(seed + 1)) < 1e-5


class TestDenseSigmoid:
    def test_zero_input_zero_params_half(self):
        params = ParamBlock({"h.W": np.zeros((1, 4)), "h.b": np.zeros(1)})
        out = neural.dense_forward(params, "h", np.zeros(4), None, "sigmoid")
        assert float(out) == 0.5

    def test_monotone_to_one(self, rng):
        params = ParamBlock({"h.W": np.ones((1, 1)), "h.b": np.zeros(1)})
        values = [
            float(neural.dense_forward(params, "h", np.array([v]), None, "sigmoid"))
            for v in (0.0, 2.0, 10.0, 30.0)
        ]
        assert values == sorted(values)
        assert values[-1] > 1 - 1e-9

    def test_shape_mismatch(self, rng):
        params = ParamBlock({"h.W": np.zeros((1, 4)), "h.b": np.zeros(1)})
        with pytest.raises(NeuralError):
            neural.dense_forward(params, "h", np.zeros(3), None)

    @pytest.mark.parametrize("seed", range(20))
    def test_gradient(self, seed):
        r = np.random.default_rng(seed)
        d = neural.init_dense(r, 2, 5)
        params = ParamBlock({"h.W": d["W"], "h.b": d["b"]})
        x = r.standard_normal((3, 5))
        upstream = r.standard_normal((3, 2))

        def f(p):
            tape = Tape()
            out = neural.dense_forward(p, "h", x, tape, "sigmoid")
            grads, _ = tape.backward(upstream)
            return float(np.sum(upstream * out)), grads

        assert grad_check(f, params, rng=np.random.default_rng(seed + 1)) < 1e-5


class TestDropout:
    def test_rate_zero_identity(self, rng):
        x = rng.standard_normal((4, 3))
        out = neural.dropout_forward(x, 0.0, rng, "train", None)
        assert np.array_equal(out, x)

    def test_eval_identity(self, rng):
        x = rng.standard_normal((4, 3))
        out = neural.dropout_forward(x, 0.9, None, "eval", None)
        assert np.array_equal(out, x)

    def test_zero_fraction_concentrates(self, rng):
        x = np.ones(100_000)
        out = neural.dropout_forward(x, 0.3, rng, "train", None)
        zero_fraction = float(np.mean(out == 0.0))
        assert abs(zero_fraction - 0.3) < 0.01

    def test_train_expectation_matches_input(self, rng):
        x = np.full(100_000, 2.0)
        out = neural.dropout_forward(x, 0.3, rng, "train", None)
        assert abs(out.mean() - 2.0) < 0.05

    def test_bad_rate(self, rng):
        with pytest.raises(ValueError):
            neural.dropout_forward(np.ones(3), 1.0, rng, "train", None)


class TestTape:
    def test_identity_composite_passes_upstream(self):
        tape = Tape()
        tape.record(lambda d, grads: d)
        upstream = np.array([1.0, -2.0])
        _, d_in = tape.backward(upstream)
        assert np.array_equal(d_in, upstream)

    def test_zero_upstream_zero_grads(self, rng):
        params = ParamBlock({"e": neural.init_embedding(rng, 4, 3)})
        tape = Tape()
        out = neural.embed_forward(params, "e", [0, 1], tape)
        grads, _ = tape.backward(np.zeros_like(out))
        assert np.allclose(grads["e"], 0.0)

    def test_reuse_raises(self, rng):
        params = ParamBlock({"e": neural.init_embedding(rng, 4, 3)})
        tape = Tape()
        out = neural.embed_forward(params, "e", [0], tape)
        tape.backward(np.zeros_like(out))
        with pytest.raises(TapeConsumedError):
            tape.backward(np.zeros_like(out))

    @pytest.mark.parametrize("seed", range(20))
    def test_composed_graph_gradient(self, seed):
        r = np.random.default_rng(seed)
        arrays = {"emb": neural.init_embedding(r, 6, 4)}
        arrays.update(make_blstm_params(r, 4, 3))
        head = neural.init_dense(r, 1, 6)
        arrays["head.W"] = head["W"]
        arrays["head.b"] = head["b"]
        params = ParamBlock(arrays)
        ids = list(r.integers(0, 6, size=4))

        def f(p):
            tape = Tape()
            e = neural.embed_forward(p, "emb", ids, tape)
            hs = neural.blstm_forward(p, "blstm", e, tape)
            pooled = neural.pool_finals(hs, tape)
            s = neural.dense_forward(p, "head", pooled, tape, "sigmoid")
            grads, _ = tape.backward(np.float64(1.0))
            return float(s), grads

        assert grad_check(f, params, rng=np.random.default_rng(seed + 7)) < 1e-5


class TestAdam:
    def test_zero_grads_unchanged(self):
        params = ParamBlock({"w": np.array([1.0, -2.0])})
        state = AdamState.for_params(params, step_size=0.1)
        adam_step(params, {"w": np.zeros(2)}, state)
        assert np.array_equal(params["w"], np.array([1.0, -2.0]))
        assert state.t == 1

    def test_first_step_is_signed_step_size(self):
        params = ParamBlock({"w": np.array([0.0])})
        state = AdamState.for_params(params, step_size=0.1)
        adam_step(params, {"w": np.array([3.0])}, state)
        assert params["w"][0] == pytest.approx(-0.1, rel=1e-6)

    def test_quadratic_convergence(self):
        # minimize x^2/2; gradient x
        params = ParamBlock({"x": np.array([5.0])})
        state = AdamState.for_params(params, step_size=0.1)
        for _ in range(500):
            adam_step(params, {"x": params["x"].copy()}, state)
        assert abs(params["x"][0]) < 1e-3

    def test_nonfinite_gradient_names_parameter(self):
        params = ParamBlock({"w": np.zeros(1)})
        state = AdamState.for_params(params)
        with pytest.raises(NeuralError, match="w"):
            adam_step(params, {"w": np.array([np.nan])}, state)


class TestClip:
    def test_noop_below_threshold(self):
        grads = {"a": np.array([0.3, 0.4])}
        norm = clip_global_norm(grads, 5.0)
        assert norm == pytest.approx(0.5)
        assert np.allclose(grads["a"], [0.3, 0.4])

    def test_scales_to_max_norm(self):
        grads = {"a": np.array([3.0, 4.0]), "b": np.array([12.0])}
        clip_global_norm(grads, 5.0)
        total = sum(float(np.sum(g * g)) for g in grads.values())
        assert np.sqrt(total) == pytest.approx(5.0)


class TestGradCheck:
    def test_linear_closure_near_zero(self, rng):
        params = ParamBlock({"w": rng.standard_normal(5)})
        c = rng.standard_normal(5)

        def f(p):
            return float(np.dot(c, p["w"])), {"w": c.copy()}

        assert grad_check(f, params) < 1e-9

    def test_corrupted_gradient_detected(self, rng):
        params = ParamBlock({"w": rng.standard_normal(5)})
        c = rng.standard_normal(5) + 3.0

        def f(p):
            return float(np.dot(c, p["w"])), {"w": c * 1.5}

        assert grad_check(f, params) > 1e-2


class TestDeterminism:
    def build_and_step(self, seed):
        r = np.random.default_rng(seed)
        params = ParamBlock(make_blstm_params(r, 3, 2))
        state = AdamState.for_params(params, step_size=0.01)
        x = np.random.default_rng(99).standard_normal((4, 3))
        for _ in range(3):
            tape = Tape()
            hs = neural.blstm_forward(params, "blstm", x, tape)
            grads, _ = tape.backward(np.ones_like(hs))
            adam_step(params, grads, state)
        return params

    def test_same_seed_bit_identical(self):
        a = self.build_and_step(7)
        b = self.build_and_step(7)
        for name in a.names():
            assert np.array_equal(a[name], b[name])


class TestCheckpoint:
    def test_exact_round_trip(self, rng, tmp_path):
        params = ParamBlock(
            {"a.W": rng.standard_normal((3, 4)), "b": rng.standard_normal(2)}
        )
        path = tmp_path / "model.npz"
        save_params(path, params, meta={"kind": "test"})
        loaded, meta = load_params(path)
        assert meta["kind"] == "test"
        for name in params.names():
            assert np.array_equal(loaded[name], params[name])

    def test_version_check(self, rng, tmp_path):
        path = tmp_path / "model.npz"
        np.savez(path, __format_version__=np.int64(999))
        with pytest.raises(NeuralError):
            load_params(path)


class TestKernelBackends:
    @pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not installed")
    def test_lstm_backends_agree(self, rng):
        f_np, b_np, _ = kernels.get_kernels("numpy")
        f_nb, b_nb, _ = kernels.get_kernels("numba")
        x = rng.standard_normal((5, 3))
        lstm = neural.init_lstm(rng, 3, 4)
        h0 = np.zeros(4)
        c0 = np.zeros(4)
        args = (x, lstm["Wx"], lstm["Wh"], lstm["b"], h0, c0)
        hs_a, cs_a, gates_a = f_np(*args)
        hs_b, cs_b, gates_b = f_nb(*args)
        assert np.allclose(hs_a, hs_b, atol=1e-14)
        d_hs = rng.standard_normal((5, 4))
        out_a = b_np(x, lstm["Wx"], lstm["Wh"], gates_a, cs_a, hs_a, h0, c0,
                     d_hs, np.zeros(4), np.zeros(4))
        out_b = b_nb(x, lstm["Wx"], lstm["Wh"], gates_b, cs_b, hs_b, h0, c0,
                     d_hs, np.zeros(4), np.zeros(4))
        for a, b in zip(out_a, out_b):
            assert np.allclose(a, b, atol=1e-14)

    @pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not installed")
    def test_levenshtein_backends_agree(self, rng):
        _, _, lev_np = kernels.get_kernels("numpy")
        _, _, lev_nb = kernels.get_kernels("numba")
        for _ in range(50):
            a = rng.integers(0, 3, size=rng.integers(0, 7)).astype(np.int64)
            b = rng.integers(0, 3, size=rng.integers(1, 7)).astype(np.int64)
            if len(a) == 0:
                continue
            assert lev_np(a, b) == lev_nb(a, b)
