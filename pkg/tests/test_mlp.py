"""Student network: grid validation, gradients vs finite differences, training."""

import math

import numpy as np
import pytest

from forestdistill.mlp import (
    Mlp,
    Standardizer,
    StudentConfig,
    TrainingDivergedError,
    cross_entropy,
    forward_logits,
    init_weights,
    loss_and_grad,
    log_softmax,
    parse_config_id,
    train_student,
)


def blobs(n_per_class, d, classes, seed, spread=0.5):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=4.0, size=(classes, d))
    X = np.vstack([
        centers[c] + rng.normal(scale=spread, size=(n_per_class, d))
        for c in range(classes)
    ])
    y = np.repeat(np.arange(classes), n_per_class)
    return X, y


def cfg(layers=1, nodes=10, bottleneck=1.0, activation="relu", lr=1e-3):
    return StudentConfig(layers, nodes, bottleneck, activation, lr)


class TestStudentConfig:
    def test_valid_values_accepted(self):
        c = cfg(3, 400, 0.2, "tanh", 1e-5)
        assert c.config_id == "l3-n400-r0.2-tanh-1e-05"

    def test_out_of_grid_rejected(self):
        with pytest.raises(ValueError, match="layers"):
            cfg(layers=6)
        with pytest.raises(ValueError, match="nodes"):
            cfg(nodes=50)
        with pytest.raises(ValueError, match="bottleneck"):
            cfg(bottleneck=0.3)
        with pytest.raises(ValueError, match="activation"):
            cfg(activation="sigmoid")
        with pytest.raises(ValueError, match="lr"):
            cfg(lr=0.5)

    def test_config_id_round_trip(self):
        for c in (
            cfg(1, 10, 0.2, "relu", 1e-2),
            cfg(2, 25, 0.5, "tanh", 1e-3),
            cfg(4, 200, 1.0, "relu", 1e-4),
            cfg(5, 400, 0.5, "tanh", 1e-5),
        ):
            assert parse_config_id(c.config_id) == c

    def test_malformed_id_rejected(self):
        with pytest.raises(ValueError, match="malformed"):
            parse_config_id("x1-n10-r0.2-relu-1e-02")
        with pytest.raises(ValueError, match="malformed"):
            parse_config_id("l1-n10-relu-1e-02")

    def test_hidden_widths_no_bottleneck_below_three_layers(self):
        assert cfg(1, 100, 0.2).hidden_widths() == (100,)
        assert cfg(2, 100, 0.2).hidden_widths() == (100, 100)

    def test_hidden_widths_bottleneck_at_middle(self):
        assert cfg(3, 10, 0.2).hidden_widths() == (10, 2, 10)
        assert cfg(3, 25, 0.5).hidden_widths() == (25, 13, 25)  # ceil(12.5)
        assert cfg(4, 100, 0.5).hidden_widths() == (100, 100, 50, 100)
        assert cfg(5, 400, 0.2).hidden_widths() == (400, 400, 80, 400, 400)
        assert cfg(5, 400, 1.0).hidden_widths() == (400,) * 5


class TestInit:
    def test_shapes_follow_architecture(self):
        rng = np.random.default_rng(0)
        w = init_weights(cfg(3, 10, 0.5), in_dim=7, out_dim=4, rng=rng)
        shapes = [W.shape for W, _ in w]
        assert shapes == [(7, 10), (10, 5), (5, 10), (10, 4)]

    def test_biases_zero(self):
        rng = np.random.default_rng(1)
        for _, b in init_weights(cfg(2, 25), 5, 3, rng):
            assert np.all(b == 0.0)

    def test_relu_bound_is_fan_in_only(self):
        rng = np.random.default_rng(2)
        w = init_weights(cfg(1, 400, activation="relu"), 9, 3, rng)
        limit = math.sqrt(6.0 / 9)
        assert np.abs(w[0][0]).max() <= limit
        assert np.abs(w[0][0]).max() > 0.8 * limit  # actually fills the range

    def test_tanh_bound_uses_both_fans(self):
        rng = np.random.default_rng(3)
        w = init_weights(cfg(1, 400, activation="tanh"), 9, 3, rng)
        limit = math.sqrt(6.0 / (9 + 400))
        assert np.abs(w[0][0]).max() <= limit


class TestForward:
    def test_logit_shape(self):
        rng = np.random.default_rng(4)
        w = init_weights(cfg(2, 10), 6, 3, rng)
        X = rng.normal(size=(15, 6))
        assert forward_logits(w, X, "relu").shape == (15, 3)

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(5)
        logits = rng.normal(scale=10, size=(20, 4))
        p = np.exp(log_softmax(logits))
        assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(p > 0)

    def test_log_softmax_stable_at_extremes(self):
        logits = np.array([[1000.0, 0.0], [-1000.0, 0.0]])
        lp = log_softmax(logits)
        assert np.all(np.isfinite(lp))
        assert lp[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_cross_entropy_uniform_logits(self):
        logits = np.zeros((6, 4))
        targets = np.full((6, 4), 0.25)
        assert cross_entropy(logits, targets) == pytest.approx(math.log(4))

    def test_cross_entropy_perfect_prediction(self):
        logits = np.array([[50.0, 0.0, 0.0]])
        targets = np.array([[1.0, 0.0, 0.0]])
        assert cross_entropy(logits, targets) == pytest.approx(0.0, abs=1e-12)


def numeric_grad(weights, X, T, activation, eps=1e-5):
    """Central finite differences of the loss in every parameter."""
    grads = []
    for li, (W, b) in enumerate(weights):
        gW = np.zeros_like(W)
        gb = np.zeros_like(b)
        for arr, g in ((W, gW), (b, gb)):
            flat = arr.ravel()
            gflat = g.ravel()
            for k in range(flat.size):
                orig = flat[k]
                flat[k] = orig + eps
                hi = cross_entropy(forward_logits(weights, X, activation), T)
                flat[k] = orig - eps
                lo = cross_entropy(forward_logits(weights, X, activation), T)
                flat[k] = orig
                gflat[k] = (hi - lo) / (2 * eps)
        grads.append((gW, gb))
    return grads


def max_rel_err(analytic, numeric):
    worst = 0.0
    for (aW, ab), (nW, nb) in zip(analytic, numeric):
        for a, n in ((aW, nW), (ab, nb)):
            denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
            worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


def min_abs_preact(weights, X, activation):
    """Smallest |pre-activation| across hidden layers (kink distance for relu)."""
    from forestdistill.mlp import _act

    a = X
    smallest = math.inf
    for W, b in weights[:-1]:
        z = a @ W + b
        smallest = min(smallest, float(np.abs(z).min()))
        a = _act(z, activation)
    return smallest


def kink_safe_weights(config, in_dim, out_dim, X, rng):
    """Init where no relu pre-activation sits within finite-difference reach of 0.

    Zero biases can park whole layers exactly on the kink (an all-dead row
    upstream makes every downstream pre-activation equal its bias), where
    the subgradient choice is arbitrary and finite differences straddle two
    slopes.  Nudging biases off zero keeps the check on differentiable
    ground; retries are deterministic given the rng.
    """
    for _ in range(50):
        w = init_weights(config, in_dim, out_dim, rng)
        w = [(W, rng.uniform(0.05, 0.3, size=b.shape) * rng.choice([-1.0, 1.0], size=b.shape))
             for W, b in w]
        if min_abs_preact(w, X, config.activation) > 1e-3:
            return w
    raise AssertionError("no kink-safe init found")


class TestGradients:
    @pytest.mark.parametrize("activation", ["relu", "tanh"])
    @pytest.mark.parametrize("layers,bottleneck", [(1, 1.0), (2, 1.0), (3, 0.2), (4, 0.5), (5, 0.5)])
    def test_backprop_matches_finite_differences(self, activation, layers, bottleneck):
        rng = np.random.default_rng(layers * 10 + (activation == "tanh"))
        config = cfg(layers, 10, bottleneck, activation)
        X = rng.normal(size=(9, 4))
        T = rng.dirichlet(np.ones(3), size=9)
        w = kink_safe_weights(config, 4, 3, X, rng)
        loss, analytic = loss_and_grad(w, X, T, activation)
        assert math.isfinite(loss)
        numeric = numeric_grad(w, X, T, activation)
        assert max_rel_err(analytic, numeric) <= 1e-4

    def test_gradient_of_soft_and_hard_targets_differ(self):
        rng = np.random.default_rng(9)
        w = init_weights(cfg(1, 10), 3, 2, rng)
        X = rng.normal(size=(5, 3))
        hard = np.array([[1.0, 0], [0, 1], [1, 0], [0, 1], [1, 0]])
        soft = np.array([[0.9, 0.1], [0.2, 0.8], [0.7, 0.3], [0.4, 0.6], [0.8, 0.2]])
        _, g_hard = loss_and_grad(w, X, hard, "relu")
        _, g_soft = loss_and_grad(w, X, soft, "relu")
        assert not np.allclose(g_hard[0][0], g_soft[0][0])


class TestStandardizer:
    def test_zero_mean_unit_variance(self):
        rng = np.random.default_rng(10)
        X = rng.normal(loc=5.0, scale=3.0, size=(200, 4))
        Z = Standardizer().fit(X).transform(X)
        assert np.allclose(Z.mean(axis=0), 0.0, atol=1e-10)
        assert np.allclose(Z.std(axis=0), 1.0, atol=1e-10)

    def test_constant_column_maps_to_zero(self):
        X = np.column_stack([np.full(10, 7.0), np.arange(10.0)])
        Z = Standardizer().fit(X).transform(X)
        assert np.all(Z[:, 0] == 0.0)
        assert np.all(np.isfinite(Z))

    def test_train_statistics_reused(self):
        s = Standardizer().fit(np.array([[0.0], [2.0]]))
        assert s.transform(np.array([[4.0]]))[0, 0] == pytest.approx(3.0)

    def test_unfitted_rejected(self):
        with pytest.raises(ValueError, match="not fitted"):
            Standardizer().transform(np.zeros((2, 2)))


class TestTraining:
    def test_loss_decreases_and_fits_blobs(self):
        X, y = blobs(20, 3, 3, seed=11, spread=0.4)
        result = train_student(X, y, cfg(2, 25, lr=1e-2), seed=0, max_epochs=150)
        assert result.loss_history[-1] < result.loss_history[0]
        acc = float((result.model.predict(X) == y).mean())
        assert acc >= 0.95

    def test_soft_targets_accepted(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(30, 4))
        T = rng.dirichlet(np.ones(3), size=30)
        result = train_student(X, T, cfg(1, 10, lr=1e-3), seed=1, max_epochs=20)
        proba = result.model.predict_proba(X)
        assert proba.shape == (30, 3)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)

    def test_early_stopping_fires(self):
        X, y = blobs(10, 2, 2, seed=13)
        result = train_student(
            X, y, cfg(1, 10, lr=1e-5), seed=2, max_epochs=200, tol=10.0, patience=10
        )
        assert result.stopped_early
        assert result.epochs == 11  # first epoch sets the bar, then patience runs out

    def test_max_epochs_respected(self):
        X, y = blobs(10, 2, 2, seed=14)
        result = train_student(X, y, cfg(1, 10, lr=1e-2), seed=3, max_epochs=5, patience=50)
        assert result.epochs <= 5
        assert len(result.loss_history) == result.epochs

    def test_deterministic_given_seed(self):
        X, y = blobs(10, 3, 2, seed=15)
        a = train_student(X, y, cfg(2, 10, lr=1e-3), seed=4, max_epochs=10)
        b = train_student(X, y, cfg(2, 10, lr=1e-3), seed=4, max_epochs=10)
        c = train_student(X, y, cfg(2, 10, lr=1e-3), seed=5, max_epochs=10)
        for (Wa, ba), (Wb, bb) in zip(a.model.weights, b.model.weights):
            assert np.array_equal(Wa, Wb)
            assert np.array_equal(ba, bb)
        assert not all(
            np.array_equal(Wa, Wc) for (Wa, _), (Wc, _) in zip(a.model.weights, c.model.weights)
        )

    def test_divergence_raises_with_epoch(self):
        # inputs at the float64 ceiling overflow the first matmul
        rng = np.random.default_rng(16)
        X = rng.choice([-1e308, 1e308], size=(12, 4))
        y = rng.integers(0, 2, size=12)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(TrainingDivergedError) as err:
                train_student(X, y, cfg(2, 10, lr=1e-2), seed=6, standardize=False)
        assert err.value.epoch == 1

    def test_standardization_stored_in_model(self):
        X, y = blobs(15, 3, 2, seed=17)
        X = X * 100 + 500
        result = train_student(X, y, cfg(1, 10, lr=1e-2), seed=7, max_epochs=50)
        m = result.model
        assert m.mean is not None
        assert np.allclose(m.mean, X.mean(axis=0))
        # prediction applies the stored scaling to raw inputs
        acc = float((m.predict(X) == y).mean())
        assert acc >= 0.9

    def test_target_validation(self):
        X = np.zeros((4, 2))
        with pytest.raises(ValueError, match="row-stochastic"):
            train_student(X, np.full((4, 2), 0.3), cfg(), seed=0)
        with pytest.raises(ValueError, match="length"):
            train_student(X, np.array([0, 1]), cfg(), seed=0)
        with pytest.raises(ValueError, match="two classes"):
            train_student(X, np.zeros(4, dtype=int), cfg(), seed=0)
        with pytest.raises(ValueError, match="NaN"):
            train_student(np.full((4, 2), np.nan), np.array([0, 1, 0, 1]), cfg(), seed=0)

    def test_explicit_class_count_pads_onehot(self):
        X = np.random.default_rng(18).normal(size=(10, 3))
        y = np.zeros(10, dtype=int)
        result = train_student(X, y, cfg(1, 10), seed=8, n_classes=3, max_epochs=5)
        assert result.model.out_dim == 3


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        X, y = blobs(10, 4, 3, seed=19)
        result = train_student(X, y, cfg(3, 10, 0.5, "tanh", 1e-3), seed=9, max_epochs=10)
        m = result.model
        path = tmp_path / "student.npz"
        m.save(path)
        g = Mlp.load(path)
        assert g.config == m.config
        assert g.in_dim == m.in_dim and g.out_dim == m.out_dim
        assert np.array_equal(g.mean, m.mean)
        assert np.array_equal(g.scale, m.scale)
        for (Wa, ba), (Wb, bb) in zip(m.weights, g.weights):
            assert np.array_equal(Wa, Wb)
            assert np.array_equal(ba, bb)
        assert np.array_equal(g.predict_proba(X), m.predict_proba(X))

    def test_unstandardized_round_trip(self, tmp_path):
        X, y = blobs(10, 2, 2, seed=20)
        result = train_student(X, y, cfg(1, 10), seed=10, max_epochs=5, standardize=False)
        path = tmp_path / "raw.npz"
        result.model.save(path)
        g = Mlp.load(path)
        assert g.mean is None
        assert np.array_equal(g.predict_proba(X), result.model.predict_proba(X))
