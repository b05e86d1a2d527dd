"""
costnet/tests.py
================
Tests for the cost encoders, Adam and checkpoints.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy import sparse

from costnet.services import (
    AdamState,
    BackwardBeforeForwardError,
    Checkpoint,
    CheckpointError,
    CostField,
    CostNetError,
    EncoderConfig,
    FcnCostEncoder,
    InvalidSettingError,
    LinearCostEncoder,
    NonFiniteGradientError,
    ShapeMismatchError,
    adam_step,
    build_encoder,
    gradient_check,
    load_checkpoint,
    save_checkpoint,
)
from costnet.services.layers import Conv2d
from costnet.services.optimizer import Adam

K1 = 4
SMALL = EncoderConfig(kind="fcn", channels=(3, 4), seed=7)


def random_posterior(height: int, width: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    logits = rng.normal(size=(K1, height, width))
    e = np.exp(logits - logits.max(axis=0))
    return e / e.sum(axis=0)


# ──────────────────────────────────────────────
# Loop-based reference forward pass
# ──────────────────────────────────────────────


def naive_conv(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    c_out, c_in, k, _ = w.shape
    _, height, width = x.shape
    p = k // 2
    out = np.zeros((c_out, height, width))
    for o in range(c_out):
        for r in range(height):
            for c in range(width):
                total = b[o]
                for i in range(c_in):
                    for dr in range(k):
                        for dc in range(k):
                            rr, cc = r + dr - p, c + dc - p
                            if 0 <= rr < height and 0 <= cc < width:
                                total += w[o, i, dr, dc] * x[i, rr, cc]
                out[o, r, c] = total
    return out


def naive_block(x: np.ndarray, params, prefix: str) -> np.ndarray:
    y = naive_conv(x, params[f"{prefix}.weight"], params[f"{prefix}.bias"])
    y = y * params[f"{prefix}_affine.scale"][:, None, None] + params[f"{prefix}_affine.shift"][:, None, None]
    return np.maximum(y, 0.0)


def naive_fcn(posterior: np.ndarray, params) -> np.ndarray:
    a = naive_block(posterior, params, "enc1")
    channels, height, width = a.shape
    pooled = np.zeros((channels, height // 2, width // 2))
    where = {}
    for ch in range(channels):
        for r in range(height // 2):
            for c in range(width // 2):
                best = None
                for dr, dc in ((0, 0), (0, 1), (1, 0), (1, 1)):
                    v = a[ch, 2 * r + dr, 2 * c + dc]
                    if best is None or v > best:
                        best, where[ch, r, c] = v, (2 * r + dr, 2 * c + dc)
                pooled[ch, r, c] = best
    m = naive_block(pooled, params, "mid")
    up = np.zeros((m.shape[0], height, width))
    for ch in range(m.shape[0]):
        for r in range(height // 2):
            for c in range(width // 2):
                rr, cc = where[ch % channels, r, c]
                up[ch, rr, cc] = m[ch, r, c]
    d = naive_block(up, params, "dec1")
    head = naive_conv(d, params["head.weight"], params["head.bias"])
    return np.maximum(head[0], 0.0)


# ──────────────────────────────────────────────
# Forward
# ──────────────────────────────────────────────


class ForwardTests(SimpleTestCase):
    def test_zero_params_give_zero_costs(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        zeros = encoder.init_params().zeros_like()
        field = encoder.forward(random_posterior(8, 8), zeros)
        np.testing.assert_array_equal(field.values, np.zeros((8, 8)))

    def test_costs_are_non_negative(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        params = encoder.init_params()
        for name in params:
            params[name] = params[name] * 5.0
        params["head.bias"] = np.array([-0.5])
        for seed in range(5):
            values = encoder.forward(random_posterior(8, 8, seed), params).values
            self.assertTrue(np.all(values >= 0.0))

    def test_forward_is_deterministic(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        x = random_posterior(8, 8)
        a = encoder.forward(x, encoder.init_params()).values
        b = encoder.forward(x, encoder.init_params()).values
        np.testing.assert_array_equal(a, b)

    def test_matches_loop_reference(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        params = encoder.init_params()
        params["head.bias"] = np.array([0.2])
        x = random_posterior(8, 8, seed=3)
        fast = encoder.forward(x, params).values
        slow = naive_fcn(x, params)
        np.testing.assert_allclose(fast, slow, rtol=1e-10, atol=1e-12)
        self.assertAlmostEqual(fast[3, 5], slow[3, 5], places=12)

    def test_linear_encoder_uniform_input_gives_constant_output(self) -> None:
        encoder = LinearCostEncoder(EncoderConfig(kind="linear"), K1)
        x = np.full((K1, 6, 9), 0.25)
        values = encoder.forward(x, encoder.init_params()).values
        np.testing.assert_allclose(values, np.full_like(values, values[0, 0]), rtol=0, atol=1e-14)

    def test_linear_encoder_is_a_per_class_table(self) -> None:
        encoder = LinearCostEncoder(EncoderConfig(kind="linear"), K1)
        params = encoder.init_params()
        params["head.weight"] = np.array([1.0, 100.0, 10.0, 0.5]).reshape(1, K1, 1, 1)
        params["head.bias"] = np.zeros(1)
        x = np.zeros((K1, 2, 2))
        x[2, 0, 1] = 1.0
        x[3, 1, 1] = 1.0
        x[0, 0, 0] = 1.0
        x[1, 1, 0] = 1.0
        np.testing.assert_allclose(encoder.forward(x, params).values, [[1.0, 10.0], [100.0, 0.5]])

    def test_circular_padding_is_equivariant_to_even_shifts(self) -> None:
        encoder = FcnCostEncoder(EncoderConfig(kind="fcn", channels=(3, 4), padding_mode="circular", seed=2), K1)
        params = encoder.init_params()
        x = random_posterior(8, 8, seed=5)
        shifted = np.roll(x, shift=(2, 2), axis=(1, 2))
        a = encoder.forward(x, params).values
        b = encoder.forward(shifted, params).values
        np.testing.assert_allclose(np.roll(a, shift=(2, 2), axis=(0, 1)), b, atol=1e-12)

    def test_wrong_channel_count_raises(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        with self.assertRaises(ShapeMismatchError):
            encoder.forward(np.zeros((K1 + 1, 8, 8)), encoder.init_params())

    def test_odd_or_tiny_grid_raises(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        with self.assertRaises(ShapeMismatchError):
            encoder.forward(np.zeros((K1, 7, 8)), encoder.init_params())
        with self.assertRaises(ShapeMismatchError):
            encoder.forward(np.zeros((K1, 2, 2)), encoder.init_params())

    def test_init_uses_fan_in_bound_and_output_bias(self) -> None:
        encoder = FcnCostEncoder(EncoderConfig(), K1)
        params = encoder.init_params()
        bound = np.sqrt(1.0 / (K1 * 9))
        self.assertLessEqual(np.abs(params["enc1.weight"]).max(), bound)
        np.testing.assert_array_equal(params["head.bias"], [1.0])
        self.assertEqual(params["mid.weight"].shape, (64, 32, 3, 3))

    def test_build_encoder_dispatches_on_kind(self) -> None:
        self.assertIsInstance(build_encoder(EncoderConfig(kind="linear"), K1), LinearCostEncoder)
        self.assertIsInstance(build_encoder(EncoderConfig(), K1), FcnCostEncoder)


# ──────────────────────────────────────────────
# Backward
# ──────────────────────────────────────────────


class BackwardTests(SimpleTestCase):
    def test_zero_upstream_gives_zero_gradients(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        field = encoder.forward(random_posterior(8, 8), encoder.init_params())
        grads, d_input = encoder.backward(field, np.zeros((8, 8)))
        for name in grads:
            self.assertFalse(np.any(grads[name]), name)
        self.assertFalse(np.any(d_input))

    def test_dead_output_cell_contributes_nothing(self) -> None:
        encoder = LinearCostEncoder(EncoderConfig(kind="linear"), K1)
        params = encoder.init_params()
        params["head.weight"] = np.array([1.0, -1.0, 1.0, 1.0]).reshape(1, K1, 1, 1)
        params["head.bias"] = np.zeros(1)
        x = np.zeros((K1, 3, 3))
        x[0] = 1.0
        x[:, 0, 0] = [0.0, 1.0, 0.0, 0.0]
        field = encoder.forward(x, params)
        self.assertEqual(field.values[0, 0], 0.0)
        upstream = np.zeros((3, 3))
        upstream[0, 0] = 1.0
        grads, d_input = encoder.backward(field, upstream)
        self.assertFalse(np.any(grads["head.weight"]))
        self.assertFalse(np.any(d_input))

    def test_sparse_and_dense_upstream_agree(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        field = encoder.forward(random_posterior(8, 8), encoder.init_params())
        coo = sparse.coo_matrix(([1.0, -2.0], ([1, 6], [2, 3])), shape=(8, 8))
        g_sparse, d_sparse = encoder.backward(field, coo)
        g_dense, d_dense = encoder.backward(field, coo.toarray())
        for name in g_dense:
            np.testing.assert_array_equal(g_sparse[name], g_dense[name])
        np.testing.assert_array_equal(d_sparse, d_dense)

    def test_backward_without_forward_raises(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        with self.assertRaises(BackwardBeforeForwardError):
            encoder.backward(CostField.from_values(np.ones((8, 8))), np.ones((8, 8)))

    def test_released_field_cannot_be_differentiated(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        field = encoder.forward(random_posterior(8, 8), encoder.init_params())
        field.release()
        with self.assertRaises(BackwardBeforeForwardError):
            encoder.backward(field, np.ones((8, 8)))

    def test_upstream_shape_is_checked(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        field = encoder.forward(random_posterior(8, 8), encoder.init_params())
        with self.assertRaises(ShapeMismatchError):
            encoder.backward(field, np.ones((8, 6)))
        with self.assertRaises(ShapeMismatchError):
            encoder.backward(field, sparse.coo_matrix((10, 10)))

    def test_fields_from_several_forwards_stay_valid(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        params = encoder.init_params()
        first = encoder.forward(random_posterior(8, 8, 1), params)
        second = encoder.forward(random_posterior(8, 8, 2), params)
        g_first_late, _ = encoder.backward(first, np.ones((8, 8)))
        g_first, _ = encoder.backward(encoder.forward(random_posterior(8, 8, 1), params), np.ones((8, 8)))
        encoder.backward(second, np.ones((8, 8)))
        for name in g_first:
            np.testing.assert_array_equal(g_first[name], g_first_late[name])

    def test_input_gradient_matches_finite_differences(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        report = gradient_check(encoder, random_posterior(8, 8, 4), trials=0, input_trials=20, seed=3)
        self.assertTrue(report.passed, report)


class GradientCheckTests(SimpleTestCase):
    def test_linear_model_agrees_to_machine_precision(self) -> None:
        encoder = LinearCostEncoder(EncoderConfig(kind="linear"), K1)
        report = gradient_check(encoder, random_posterior(8, 8), trials=20, input_trials=10)
        self.assertEqual(report.checked, 30)
        self.assertLess(report.max_relative_error, 1e-7)

    def test_small_fcn_passes(self) -> None:
        encoder = FcnCostEncoder(SMALL, K1)
        report = gradient_check(encoder, random_posterior(8, 8, 1), trials=20, seed=1)
        self.assertTrue(report.passed, report)

    def test_full_model_on_16_by_16_passes(self) -> None:
        encoder = FcnCostEncoder(EncoderConfig(), K1)
        report = gradient_check(encoder, random_posterior(16, 16, 2), trials=20, tol=1e-4)
        self.assertLess(report.max_relative_error, 1e-4)

    def test_corrupted_backward_is_reported(self) -> None:
        class Corrupted(LinearCostEncoder):
            def backward(self, cost_field, upstream):
                grads, d_input = super().backward(cost_field, upstream)
                for name in grads:
                    grads[name] = grads[name] * 1.5
                return grads, d_input

        report = gradient_check(Corrupted(EncoderConfig(kind="linear"), K1), random_posterior(8, 8), trials=20)
        self.assertFalse(report.passed)
        self.assertGreater(report.max_relative_error, 0.1)


# ──────────────────────────────────────────────
# Adam
# ──────────────────────────────────────────────


class AdamTests(SimpleTestCase):
    def test_zero_gradient_leaves_parameters_unchanged(self) -> None:
        params = {"w": np.array([1.0, -2.0])}
        adam_step(params, {"w": np.zeros(2)}, 1e-3, 0.9, 0.999, 1e-8, t=1)
        np.testing.assert_array_equal(params["w"], [1.0, -2.0])

    def test_single_step_matches_hand_calculation(self) -> None:
        params = {"w": np.array([0.0])}
        adam_step(params, {"w": np.array([1.0])}, 1e-3, 0.9, 0.999, 1e-8, t=1)
        self.assertAlmostEqual(params["w"][0], -1e-3 / (1.0 + 1e-8), places=15)

    def test_constant_gradient_steps_approach_learning_rate(self) -> None:
        params = {"w": np.array([0.0])}
        adam = Adam(lr=1e-3)
        previous = 0.0
        for _ in range(100):
            adam.step(params, {"w": np.array([0.5])})
            delta = previous - params["w"][0]
            previous = params["w"][0]
            self.assertAlmostEqual(delta, 1e-3, places=7)
        self.assertEqual(adam.t, 100)

    def test_non_finite_gradient_raises_and_leaves_params(self) -> None:
        params = {"a": np.array([1.0]), "b": np.array([2.0])}
        with self.assertRaises(NonFiniteGradientError) as ctx:
            adam_step(params, {"a": np.array([0.1]), "b": np.array([np.nan])}, 1e-3, 0.9, 0.999, 1e-8, t=1)
        self.assertEqual(ctx.exception.name, "b")
        np.testing.assert_array_equal(params["a"], [1.0])

    def test_step_number_must_be_positive(self) -> None:
        with self.assertRaises(InvalidSettingError):
            adam_step({"w": np.zeros(1)}, {"w": np.ones(1)}, 1e-3, 0.9, 0.999, 1e-8, t=0)

    def test_updates_encoder_params_mapping(self) -> None:
        encoder = LinearCostEncoder(EncoderConfig(kind="linear"), K1)
        params = encoder.init_params()
        before = params["head.weight"]
        Adam().step(params, {"head.weight": np.ones_like(before)})
        np.testing.assert_allclose(params["head.weight"], before - 1e-3, atol=1e-10)
        # the old array is replaced, not mutated
        self.assertFalse(np.shares_memory(before, params["head.weight"]))


# ──────────────────────────────────────────────
# Checkpoints
# ──────────────────────────────────────────────


class CheckpointTests(SimpleTestCase):
    def make_checkpoint(self) -> Checkpoint:
        encoder = FcnCostEncoder(SMALL, K1)
        params = encoder.init_params()
        state = AdamState()
        adam_step(params, {n: np.full_like(a, 0.3) for n, a in params.items()}, 1e-3, 0.9, 0.999, 1e-8, 1, state)
        rng = np.random.default_rng(11)
        return Checkpoint(
            encoder=SMALL,
            params=params,
            psi=rng.normal(size=(K1, K1)),
            epsilon=0.5,
            update_mode="ray",
            seed=7,
            epoch=3,
            optimizer=state,
            classes=["empty", "wall", "lava", "lawn"],
        )

    def test_round_trip_is_bit_exact(self) -> None:
        original = self.make_checkpoint()
        with tempfile.TemporaryDirectory() as tmp:
            path = save_checkpoint(original, Path(tmp) / "ckpt.json")
            loaded = load_checkpoint(path)
        self.assertEqual(loaded.encoder, original.encoder)
        self.assertEqual((loaded.seed, loaded.epoch, loaded.update_mode), (7, 3, "ray"))
        np.testing.assert_array_equal(loaded.psi, original.psi)
        for name in original.params:
            np.testing.assert_array_equal(loaded.params[name], original.params[name])
            np.testing.assert_array_equal(loaded.optimizer.m[name], original.optimizer.m[name])
            np.testing.assert_array_equal(loaded.optimizer.v[name], original.optimizer.v[name])
        self.assertEqual(loaded.optimizer.t, 1)

    def test_unknown_version_is_rejected(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = save_checkpoint(self.make_checkpoint(), Path(tmp) / "ckpt.json")
            data = json.loads(path.read_text())
            data["version"] = 99
            path.write_text(json.dumps(data))
            with self.assertRaises(CheckpointError):
                load_checkpoint(path)

    def test_missing_file_raises(self) -> None:
        with self.assertRaises(CheckpointError):
            load_checkpoint("/nonexistent/ckpt.json")

    def test_non_finite_parameters_are_not_saved(self) -> None:
        ckpt = self.make_checkpoint()
        ckpt.psi[0, 0] = np.inf
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CheckpointError):
                save_checkpoint(ckpt, Path(tmp) / "ckpt.json")


class LayerTests(SimpleTestCase):
    def test_even_kernel_is_rejected(self) -> None:
        with self.assertRaises(InvalidSettingError) as ctx:
            Conv2d("c", 1, 1, 2)
        self.assertEqual(ctx.exception.setting, "c.kernel")

    def test_unknown_padding_mode_is_rejected(self) -> None:
        with self.assertRaises(CostNetError):
            Conv2d("c", 1, 1, 3, padding_mode="mirror")
