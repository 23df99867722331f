"""Network tests: forward oracle, finite-difference gradient checks, Adam,
checkpoint round-trips."""

import math

import numpy as np
import pytest

from uno_rl.net import (
    AdamState,
    CheckpointError,
    MLPParams,
    forward,
    grad_mse,
    grad_nll,
    init_params,
    load_checkpoint,
    optimizer_step,
    save_checkpoint,
    sync_target,
)

SMALL = (6, 5, 4, 3)  # small layer config keeps finite differences cheap


def _random_batch(rng, params, n):
    in_dim = params.weights[0].shape[0]
    out_dim = params.weights[-1].shape[1]
    x = rng.integers(0, 2, size=(n, in_dim)).astype(np.float64)
    a = rng.integers(0, out_dim, size=n)
    t = rng.normal(size=n)
    return x, a, t


def _jitter_biases(params, rng):
    """Push pre-activations away from the ReLU kink so central differences
    with h=1e-6 stay on one side of it."""
    for b in params.biases:
        b += rng.normal(scale=0.05, size=b.shape)


def _numeric_grads(params, loss_fn, h=1e-6):
    """Central finite differences over every parameter entry."""
    grads = MLPParams(
        [np.zeros_like(w) for w in params.weights],
        [np.zeros_like(b) for b in params.biases],
    )
    for p_arr, g_arr in zip(params.flat(), grads.flat()):
        flat_p = p_arr.reshape(-1)
        flat_g = g_arr.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + h
            up = loss_fn()
            flat_p[i] = orig - h
            down = loss_fn()
            flat_p[i] = orig
            flat_g[i] = (up - down) / (2 * h)
    return grads


def _max_rel_err(analytic, numeric):
    worst = 0.0
    for a, n in zip(analytic.flat(), numeric.flat()):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def oracle_forward_single(params, x):
    """Straight-line single-input forward pass with explicit loops."""
    h = list(x)
    for layer, (w, b) in enumerate(zip(params.weights, params.biases)):
        out = []
        for j in range(w.shape[1]):
            acc = b[j]
            for i in range(w.shape[0]):
                acc += h[i] * w[i, j]
            if layer < len(params.weights) - 1 and acc < 0:
                acc = 0.0
            out.append(acc)
        h = out
    return np.array(h)


class TestInit:
    def test_deterministic(self):
        a, b = init_params(seed=4), init_params(seed=4)
        for x, y in zip(a.flat(), b.flat()):
            assert np.array_equal(x, y)

    def test_biases_zero(self):
        params = init_params(seed=1)
        for b in params.biases:
            assert np.all(b == 0)

    def test_weight_bounds(self):
        params = init_params(seed=2)
        for w in params.weights:
            assert np.abs(w).max() <= 1.0 / math.sqrt(w.shape[0])

    def test_default_shapes(self):
        assert init_params(0).layer_sizes == (240, 64, 64, 61)


class TestForward:
    def test_zero_network_zero_output(self):
        params = init_params(0, SMALL)
        for w in params.weights:
            w[:] = 0
        x = np.ones((3, SMALL[0]))
        assert np.array_equal(forward(params, x), np.zeros((3, SMALL[-1])))

    def test_batch_shape(self):
        params = init_params(0)
        out = forward(params, np.zeros((5, 240)))
        assert out.shape == (5, 61)

    def test_matches_straight_line_oracle(self):
        rng = np.random.default_rng(7)
        params = init_params(3, SMALL)
        x = rng.normal(size=SMALL[0])
        got = forward(params, x)[0]
        want = oracle_forward_single(params, x)
        assert np.max(np.abs(got - want)) < 1e-12

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            forward(init_params(0), np.zeros((2, 7)))


class TestGradMse:
    def test_zero_at_fit(self):
        rng = np.random.default_rng(0)
        params = init_params(5, SMALL)
        x, a, _ = _random_batch(rng, params, 4)
        t = forward(params, x)[np.arange(4), a]
        loss, grads = grad_mse(params, x, a, t)
        assert loss == 0.0
        for g in grads.flat():
            assert np.all(g == 0)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        for trial in range(3):
            params = init_params(100 + trial, SMALL)
            _jitter_biases(params, rng)
            x, a, t = _random_batch(rng, params, 5)
            _, grads = grad_mse(params, x, a, t)
            numeric = _numeric_grads(params, lambda: grad_mse(params, x, a, t)[0])
            assert _max_rel_err(grads, numeric) < 1e-4

    def test_batch_of_identical_pairs_mean_invariance(self):
        params = init_params(6, SMALL)
        x = np.ones((1, SMALL[0]))
        single_loss, single = grad_mse(params, x, [1], [0.3])
        rep_loss, rep = grad_mse(params, np.repeat(x, 8, axis=0), [1] * 8, [0.3] * 8)
        assert rep_loss == pytest.approx(single_loss, abs=1e-12)
        for g1, g2 in zip(single.flat(), rep.flat()):
            assert np.allclose(g1, g2, atol=1e-12)


class TestGradNll:
    def test_uniform_logits_ln61(self):
        params = init_params(0)
        for w in params.weights:
            w[:] = 0
        loss, _ = grad_nll(params, np.ones((2, 240)), [5, 40])
        assert loss == pytest.approx(math.log(61), abs=1e-12)

    def test_peaked_policy_near_zero_loss(self):
        params = init_params(0, SMALL)
        for w in params.weights:
            w[:] = 0
        params.biases[-1][2] = 50.0  # logit spike on the stored action
        loss, _ = grad_nll(params, np.ones((1, SMALL[0])), [2])
        assert loss < 1e-12

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        for trial in range(3):
            params = init_params(200 + trial, SMALL)
            _jitter_biases(params, rng)
            x, a, _ = _random_batch(rng, params, 5)
            _, grads = grad_nll(params, x, a)
            numeric = _numeric_grads(params, lambda: grad_nll(params, x, a)[0])
            assert _max_rel_err(grads, numeric) < 1e-4


class TestOptimizer:
    def test_zero_gradient_no_change(self):
        params = init_params(1, SMALL)
        before = [p.copy() for p in params.flat()]
        opt = AdamState.for_params(params)
        zero = MLPParams(
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
        )
        assert optimizer_step(params, opt, zero)
        for p, b in zip(params.flat(), before):
            assert np.array_equal(p, b)

    def test_lr_zero_no_change(self):
        params = init_params(1, SMALL)
        before = [p.copy() for p in params.flat()]
        opt = AdamState.for_params(params, lr=0.0)
        _, grads = grad_mse(params, np.ones((1, SMALL[0])), [0], [1.0])
        optimizer_step(params, opt, grads)
        for p, b in zip(params.flat(), before):
            assert np.array_equal(p, b)

    def test_nonfinite_gradient_skipped(self):
        params = init_params(1, SMALL)
        before = [p.copy() for p in params.flat()]
        opt = AdamState.for_params(params)
        bad = MLPParams(
            [np.full_like(w, np.nan) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
        )
        assert not optimizer_step(params, opt, bad)
        assert opt.step == 0
        for p, b in zip(params.flat(), before):
            assert np.array_equal(p, b)

    def test_descends_fixed_batch(self):
        rng = np.random.default_rng(3)
        params = init_params(9, SMALL)
        opt = AdamState.for_params(params, lr=1e-2)
        x, a, t = _random_batch(rng, params, 8)
        first, _ = grad_mse(params, x, a, t)
        losses = []
        for _ in range(200):
            loss, grads = grad_mse(params, x, a, t)
            optimizer_step(params, opt, grads)
            losses.append(loss)
        assert losses[-1] < first * 0.5

    def test_fuzz_run_stays_finite(self):
        rng = np.random.default_rng(17)
        params = init_params(21)
        opt = AdamState.for_params(params)
        for step in range(10_000):
            x = rng.integers(0, 2, size=(32, 240)).astype(np.float64)
            a = rng.integers(0, 61, size=32)
            t = rng.normal(size=32)
            _, grads = grad_mse(params, x, a, t)
            optimizer_step(params, opt, grads)
        for p in params.flat():
            assert np.all(np.isfinite(p))


class TestSyncTarget:
    def test_outputs_match_after_sync(self):
        est = init_params(31)
        tgt = sync_target(est)
        x = np.random.default_rng(0).integers(0, 2, size=(4, 240)).astype(float)
        assert np.array_equal(forward(est, x), forward(tgt, x))

    def test_independence_after_update(self):
        est = init_params(31, SMALL)
        tgt = sync_target(est)
        opt = AdamState.for_params(est, lr=1e-2)
        _, grads = grad_mse(est, np.ones((1, SMALL[0])), [0], [5.0])
        optimizer_step(est, opt, grads)
        x = np.ones((1, SMALL[0]))
        assert not np.array_equal(forward(est, x), forward(tgt, x))

    def test_double_sync_idempotent(self):
        est = init_params(8, SMALL)
        once = sync_target(est)
        twice = sync_target(sync_target(est))
        for a, b in zip(once.flat(), twice.flat()):
            assert np.array_equal(a, b)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        params = init_params(41)
        opt = AdamState.for_params(params, lr=3e-4)
        _, grads = grad_mse(params, np.ones((1, 240)), [7], [0.5])
        optimizer_step(params, opt, grads)
        path = tmp_path / "ck.bin"
        save_checkpoint(params, opt, {"episode": 12, "seed": 99}, path)
        loaded, opt2, meta = load_checkpoint(path)
        x = np.random.default_rng(1).integers(0, 2, size=(3, 240)).astype(float)
        assert np.array_equal(forward(params, x), forward(loaded, x))
        assert opt2.step == opt.step and opt2.lr == opt.lr
        for a, b in zip(opt.m + opt.v, opt2.m + opt2.v):
            assert np.array_equal(a, b)
        assert meta == {"episode": "12", "seed": "99"}

    def test_wrong_layer_config_rejected(self, tmp_path):
        params = init_params(1, SMALL)
        path = tmp_path / "ck.bin"
        save_checkpoint(params, None, {}, path)
        with pytest.raises(CheckpointError):
            load_checkpoint(path, expect_layer_sizes=(240, 64, 64, 61))

    def test_corrupt_file_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"not a checkpoint at all")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_truncated_body_rejected(self, tmp_path):
        params = init_params(1, SMALL)
        path = tmp_path / "ck.bin"
        save_checkpoint(params, None, {}, path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-16])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_no_optimizer_round_trip(self, tmp_path):
        params = init_params(2, SMALL)
        path = tmp_path / "ck.bin"
        save_checkpoint(params, None, {"algorithm": "ddqn_mcts"}, path)
        loaded, opt, meta = load_checkpoint(path)
        assert opt is None
        assert meta["algorithm"] == "ddqn_mcts"
        for a, b in zip(params.flat(), loaded.flat()):
            assert np.array_equal(a, b)
