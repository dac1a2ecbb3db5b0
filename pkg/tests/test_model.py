"""Regressor unit tests: init, forward algebra, gradients, training, weight io."""
import dataclasses
import json

import numpy as np
import pytest

from cgsrank import (
    ModelWeights,
    NumericError,
    SirParams,
    TrainConfig,
    WeightFormatError,
    backward,
    encode,
    feature_matrix,
    forward,
    generate_ba,
    influence_labels,
    init_weights,
    kendall_tau,
    load_weights,
    mse_loss,
    network_stats,
    predict,
    sage_layer,
    save_weights,
    train,
)
from cgsrank.model import (
    TENSOR_SHAPES,
    Gradients,
    adam_step,
    init_adam_state,
)

from conftest import build_graph, random_gnp_graph


def zero_tensors():
    return {name: np.zeros(shape) for name, shape in TENSOR_SHAPES}


def zero_weights(**overrides):
    fields = zero_tensors()
    fields.update(overrides)
    return ModelWeights(**fields)


class TestInitWeights:
    def test_deterministic(self):
        a = init_weights(7)
        b = init_weights(7)
        for name, _ in TENSOR_SHAPES:
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_seeds_differ(self):
        a = init_weights(0)
        b = init_weights(1)
        assert not np.array_equal(a.conv1_kernel, b.conv1_kernel)

    def test_glorot_bounds(self):
        w = init_weights(3)
        # conv fans count kernel taps: fan_in = 1*3, fan_out = 16*3
        bound = np.sqrt(6.0 / (3 + 48))
        assert np.all(np.abs(w.conv1_kernel) <= bound)
        assert np.all(np.abs(w.sage1_W) <= np.sqrt(6.0 / (32 + 64)))

    def test_zero_biases(self):
        w = init_weights(5)
        assert np.array_equal(w.conv1_bias, np.zeros(16))
        assert np.array_equal(w.conv2_bias, np.zeros(32))
        assert np.array_equal(w.head_b, np.zeros(1))

    def test_no_stats_until_trained(self):
        assert init_weights(0).feature_min is None

    def test_shape_validation(self):
        fields = zero_tensors()
        fields["head_w"] = np.zeros(63)
        with pytest.raises(ValueError, match="head_w"):
            ModelWeights(**fields)

    def test_finite_validation(self):
        fields = zero_tensors()
        fields["sage1_W"] = np.full((64, 32), np.nan)
        with pytest.raises(ValueError, match="sage1_W"):
            ModelWeights(**fields)


class TestEncode:
    def test_zero_weights(self):
        z = encode(np.array([[1.0, 2.0], [3.0, 4.0]]), zero_weights())
        assert z.shape == (2, 32)
        assert np.array_equal(z, np.zeros((2, 32)))

    def test_shape(self):
        z = encode(np.ones((5, 2)), init_weights(0))
        assert z.shape == (5, 32)

    def test_identity_taps_hand_trace(self):
        # center-tap passthrough in both convs turns [d, a] into the
        # pooled mean (d + a) / 2 on every output channel
        k1 = np.zeros((16, 1, 3))
        k1[:, 0, 1] = 1.0
        k2 = np.zeros((32, 16, 3))
        k2[:, :, 1] = 1.0 / 16.0
        w = zero_weights(conv1_kernel=k1, conv2_kernel=k2)
        z = encode(np.array([[1.0, 2.0]]), w)
        assert np.allclose(z, 1.5)
        z = encode(np.array([[4.0, 0.0]]), w)
        assert np.allclose(z, 2.0)

    def test_bad_feature_shape(self):
        with pytest.raises(ValueError, match="shape"):
            encode(np.ones((4, 3)), init_weights(0))


class TestSageLayer:
    def test_isolated_node(self):
        g = build_graph([(0, 1)], n_hint=3)
        h = np.array([[1.0, -2.0], [3.0, 4.0], [5.0, -6.0]])
        W = np.eye(2)
        out = sage_layer(h, g, W)
        assert np.allclose(out[2], np.maximum(h[2], 0.0))

    def test_triangle_identity(self, triangle):
        h = np.eye(3)
        out = sage_layer(h, triangle, np.eye(3))
        assert np.allclose(out, np.full((3, 3), 1.0 / 3.0))

    def test_equal_neighbors(self):
        g = build_graph([(0, 1)])
        h = np.array([[2.0, 2.0], [2.0, 2.0]])
        out = sage_layer(h, g, np.eye(2))
        assert np.allclose(out[0], out[1])

    def test_shape_errors(self, triangle):
        with pytest.raises(ValueError, match="h must"):
            sage_layer(np.ones((2, 4)), triangle, np.eye(4))
        with pytest.raises(ValueError, match="W shape"):
            sage_layer(np.ones((3, 4)), triangle, np.eye(3))


class TestForward:
    def test_zero_weights_constant_bias(self, star4):
        w = zero_weights(head_b=np.array([5.0]))
        y = forward(star4, np.ones((4, 2)), w)
        assert np.allclose(y, 5.0)
        assert y.shape == (4,)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(51)
        g = random_gnp_graph(12, 0.35, rng)
        x = feature_matrix(g)
        w = init_weights(4)
        perm = rng.permutation(g.n)
        edges = []
        for u in range(g.n):
            for v in g.neighbors(u):
                if u < v:
                    edges.append((perm[u], perm[int(v)]))
        h = build_graph(edges, n_hint=g.n)
        ya = forward(g, x, w)
        yb = forward(h, feature_matrix(h), w)
        assert np.allclose(ya, yb[perm], atol=1e-10)

    def test_node_count_checked(self, triangle):
        with pytest.raises(ValueError, match="rows"):
            forward(triangle, np.ones((4, 2)), init_weights(0))


class TestMseLoss:
    def test_exact_fit(self):
        assert mse_loss(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0

    def test_examples(self):
        assert mse_loss(np.array([0.0, 0.0]), np.array([1.0, 1.0])) == 1.0
        assert mse_loss(np.array([0.0]), np.array([5.0])) == 25.0
        assert mse_loss(np.array([1.0, 2.0]), np.array([2.0, 4.0])) == 2.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            mse_loss(np.zeros(3), np.zeros(4))


class TestBackward:
    def test_zero_residual_zero_grads(self, star4):
        x = feature_matrix(star4)
        w = init_weights(2)
        labels = forward(star4, x, w)
        loss, grads = backward(star4, x, labels, w)
        assert loss == 0.0
        for name, _ in TENSOR_SHAPES:
            assert np.array_equal(getattr(grads, name), np.zeros_like(getattr(grads, name)))

    def test_label_scaling_in_head_bias(self, star4):
        x = feature_matrix(star4)
        w = zero_weights()
        labels = np.array([1.0, 2.0, 3.0, 4.0])
        _, g1 = backward(star4, x, labels, w)
        _, g2 = backward(star4, x, 2.0 * labels, w)
        assert np.allclose(g2.head_b, 2.0 * g1.head_b)

    def test_finite_difference(self):
        rng = np.random.default_rng(77)
        g = random_gnp_graph(20, 0.2, rng)
        x = feature_matrix(g).astype(np.float64)
        x /= max(x.max(), 1.0)
        labels = rng.uniform(0.5, 2.0, size=g.n)
        w = init_weights(11)
        # random biases keep preactivations clear of the ReLU kinks
        w = dataclasses.replace(
            w,
            conv1_bias=rng.uniform(0.05, 0.2, size=16),
            conv2_bias=rng.uniform(0.05, 0.2, size=32),
            head_b=rng.uniform(0.05, 0.2, size=1),
        )
        _, grads = backward(g, x, labels, w)
        step = 1e-5
        for name, shape in TENSOR_SHAPES:
            base = getattr(w, name)
            flat_idx = rng.choice(base.size, size=min(12, base.size), replace=False)
            for fi in flat_idx:
                idx = np.unravel_index(fi, shape)
                bumped = base.copy()
                bumped[idx] += step
                lp, _ = backward(g, x, labels, dataclasses.replace(w, **{name: bumped}))
                bumped[idx] -= 2 * step
                lm, _ = backward(g, x, labels, dataclasses.replace(w, **{name: bumped}))
                numeric = (lp - lm) / (2 * step)
                analytic = getattr(grads, name)[idx]
                denom = max(abs(numeric), abs(analytic), 1e-8)
                assert abs(numeric - analytic) / denom <= 1e-4, (name, idx)


class TestAdamStep:
    def test_zero_grad_no_move(self):
        w = init_weights(0)
        grads = Gradients(**zero_tensors())
        w2, state = adam_step(w, grads, init_adam_state(), TrainConfig())
        assert state.t == 1
        for name, _ in TENSOR_SHAPES:
            assert np.array_equal(getattr(w2, name), getattr(w, name))

    def test_first_step_is_signed_lr(self):
        w = zero_weights()
        fields = zero_tensors()
        fields["head_b"] = np.array([4.0])
        cfg = TrainConfig(learning_rate=0.01, epochs=1)
        w2, _ = adam_step(w, Gradients(**fields), init_adam_state(), cfg)
        assert w2.head_b[0] == pytest.approx(-0.01, rel=1e-6)
        assert np.array_equal(w2.head_w, w.head_w)

    def test_deterministic(self):
        w = init_weights(1)
        fields = {name: np.full(shape, 0.1) for name, shape in TENSOR_SHAPES}
        grads = Gradients(**fields)
        a, _ = adam_step(w, grads, init_adam_state(), TrainConfig())
        b, _ = adam_step(w, grads, init_adam_state(), TrainConfig())
        for name, _ in TENSOR_SHAPES:
            assert np.array_equal(getattr(a, name), getattr(b, name))


class TestTrain:
    def test_constant_labels(self, star5):
        x = feature_matrix(star5)
        labels = np.full(star5.n, 3.0)
        w, losses = train(star5, x, labels, TrainConfig(epochs=200, seed=0))
        assert losses[-1] < 1e-4 * 9.0
        scores = predict(star5, x, w)
        assert np.allclose(scores.values, 3.0, atol=0.05)

    def test_loss_descends(self, star5):
        x = feature_matrix(star5)
        labels = star5.degrees.astype(np.float64)
        _, losses = train(star5, x, labels, TrainConfig(epochs=300, seed=1))
        assert losses.shape == (300,)
        assert losses[-1] < losses[0]

    def test_bit_identical(self):
        g = generate_ba(40, 2, seed=3)
        x = feature_matrix(g)
        labels = g.degrees.astype(np.float64)
        cfg = TrainConfig(epochs=50, seed=5)
        w1, l1 = train(g, x, labels, cfg)
        w2, l2 = train(g, x, labels, cfg)
        assert np.array_equal(l1, l2)
        for name, _ in TENSOR_SHAPES:
            assert np.array_equal(getattr(w1, name), getattr(w2, name))
        assert np.array_equal(w1.feature_min, w2.feature_min)

    def test_divergence_raises(self, star5):
        x = feature_matrix(star5)
        labels = star5.degrees.astype(np.float64)
        cfg = TrainConfig(learning_rate=1e160, epochs=5, seed=0)
        with np.errstate(all="ignore"), pytest.raises(NumericError, match="non-finite"):
            train(star5, x, labels, cfg)

    def test_stats_persisted(self, star5):
        x = feature_matrix(star5)
        w, _ = train(star5, x, star5.degrees.astype(np.float64), TrainConfig(epochs=5))
        assert np.array_equal(w.feature_min, x.min(axis=0))
        assert np.array_equal(w.feature_max, x.max(axis=0))


class TestWeightsIo:
    def test_round_trip_bit_exact(self, tmp_path, star5):
        x = feature_matrix(star5)
        w, _ = train(star5, x, star5.degrees.astype(np.float64), TrainConfig(epochs=10))
        path = tmp_path / "w.json"
        save_weights(w, path)
        back = load_weights(path)
        for name, _ in TENSOR_SHAPES:
            assert np.array_equal(getattr(back, name), getattr(w, name))
        assert np.array_equal(back.feature_min, w.feature_min)
        assert np.array_equal(back.feature_max, w.feature_max)

    def test_untrained_round_trip(self, tmp_path):
        w = init_weights(9)
        path = tmp_path / "w.json"
        save_weights(w, path)
        assert load_weights(path).feature_min is None

    def test_truncated(self, tmp_path):
        w = init_weights(0)
        path = tmp_path / "w.json"
        save_weights(w, path)
        path.write_text(path.read_text()[: 100])
        with pytest.raises(WeightFormatError):
            load_weights(path)

    def test_bad_magic(self, tmp_path):
        w = init_weights(0)
        path = tmp_path / "w.json"
        save_weights(w, path)
        doc = json.loads(path.read_text())
        doc["magic"] = "something-else"
        path.write_text(json.dumps(doc))
        with pytest.raises(WeightFormatError, match="magic"):
            load_weights(path)

    def test_future_version(self, tmp_path):
        w = init_weights(0)
        path = tmp_path / "w.json"
        save_weights(w, path)
        doc = json.loads(path.read_text())
        doc["format_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(WeightFormatError, match="version"):
            load_weights(path)

    def test_wrong_shape(self, tmp_path):
        w = init_weights(0)
        path = tmp_path / "w.json"
        save_weights(w, path)
        doc = json.loads(path.read_text())
        doc["arrays"]["head_w"] = doc["arrays"]["head_b"]
        path.write_text(json.dumps(doc))
        with pytest.raises(WeightFormatError):
            load_weights(path)


class TestPredict:
    def test_requires_stats(self, star5):
        with pytest.raises(ValueError, match="statistics"):
            predict(star5, feature_matrix(star5), init_weights(0))

    def test_method_tag(self, star5):
        x = feature_matrix(star5)
        w, _ = train(star5, x, star5.degrees.astype(np.float64), TrainConfig(epochs=5))
        assert predict(star5, x, w).method == "1D-CGS"

    def test_monotone_with_nonnegative_weights(self, path4):
        w = init_weights(6)
        fields = {name: np.abs(getattr(w, name)) for name, _ in TENSOR_SHAPES}
        w = ModelWeights(**fields)
        lo = forward(path4, np.ones((4, 2)), w)
        hi = forward(path4, np.full((4, 2), 2.0), w)
        assert np.all(hi >= lo - 1e-12)


class TestTrainedRankingQuality:
    def test_pinned_recipe_reaches_tau(self):
        # end-to-end: synthetic graph, simulated outbreak labels, default
        # training recipe; rank correlation on the training graph itself
        g = generate_ba(1000, 2, seed=11)
        mu = 1.5 * network_stats(g).epidemic_threshold
        labels = influence_labels(g, SirParams(mu=mu, trials=10000, seed=12345))
        x = feature_matrix(g)
        w, losses = train(g, x, labels.values, TrainConfig(seed=9))
        assert losses[-1] < losses[0]
        scores = predict(g, x, w)
        tau = kendall_tau(scores.values, labels.values)
        assert tau >= 0.8
