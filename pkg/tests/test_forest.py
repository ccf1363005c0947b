"""Forest training and prediction, checked against a brute-force splitter."""

import numpy as np
import pytest

from forestdistill.forest import (
    Forest,
    ForestParams,
    best_split,
    fit_forest,
    gini,
    predict,
    predict_proba,
)


def brute_force_split(X, y, n_classes, min_leaf=1):
    """Enumerate every (feature, midpoint) pair straight from the definition.

    Same tie policy as the fast path: strictly positive gain, first
    candidate in (feature, ascending threshold) order wins ties.
    """
    m = len(y)
    total = [0] * n_classes
    for c in y:
        total[int(c)] += 1
    s = 0.0
    for c in range(n_classes):
        p = total[c] / m
        s += p * p
    parent = 1.0 - s

    best = (-1, 0.0, 0.0)
    best_gain = 0.0
    for j in range(X.shape[1]):
        distinct = sorted(set(float(v) for v in X[:, j]))
        for lo, hi in zip(distinct[:-1], distinct[1:]):
            thr = 0.5 * (lo + hi)
            left = [i for i in range(m) if X[i, j] <= thr]
            nl = len(left)
            nr = m - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            cl = [0] * n_classes
            for i in left:
                cl[int(y[i])] += 1
            sl = 0.0
            sr = 0.0
            for c in range(n_classes):
                pl = cl[c] / nl
                sl += pl * pl
                pr = (total[c] - cl[c]) / nr
                sr += pr * pr
            gain = parent - (nl / m) * (1.0 - sl) - (nr / m) * (1.0 - sr)
            if gain > best_gain:
                best_gain = gain
                best = (j, thr, gain)
    return best


def random_instance(rng, duplicates=False):
    n = int(rng.integers(5, 51))
    d = int(rng.integers(1, 6))
    classes = int(rng.integers(2, 5))
    X = rng.normal(size=(n, d))
    if duplicates:
        X = np.round(X * 2.0) / 2.0
    y = rng.integers(0, classes, size=n)
    return X, y, classes


def blobs(n_per_class, d, classes, seed, spread=0.5):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=4.0, size=(classes, d))
    X = np.vstack([
        centers[c] + rng.normal(scale=spread, size=(n_per_class, d))
        for c in range(classes)
    ])
    y = np.repeat(np.arange(classes), n_per_class)
    return X, y


class TestGini:
    def test_hand_values(self):
        assert gini([0, 0, 0], 2) == pytest.approx(0.0)
        assert gini([0, 1], 2) == pytest.approx(0.5)
        assert gini([0, 0, 1, 1, 2, 2], 3) == pytest.approx(2.0 / 3.0)
        assert gini([0, 0, 0, 1], 2) == pytest.approx(1.0 - (0.75**2 + 0.25**2))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gini([], 2)


class TestBestSplit:
    def test_agrees_with_brute_force(self):
        rng = np.random.default_rng(42)
        for trial in range(60):
            X, y, classes = random_instance(rng, duplicates=trial % 3 == 0)
            want = brute_force_split(X, y, classes)
            got = best_split(X, y, classes)
            assert got[0] == want[0], f"trial {trial}: feature mismatch"
            if want[0] >= 0:
                assert got[1] == want[1], f"trial {trial}: threshold mismatch"
                assert got[2] == pytest.approx(want[2], abs=1e-12)

    def test_agrees_with_brute_force_under_min_leaf(self):
        rng = np.random.default_rng(43)
        for trial in range(30):
            X, y, classes = random_instance(rng)
            min_leaf = int(rng.integers(2, 5))
            want = brute_force_split(X, y, classes, min_leaf)
            got = best_split(X, y, classes, min_samples_leaf=min_leaf)
            assert (got[0], got[1]) == (want[0], want[1])

    def test_children_respect_min_leaf(self):
        rng = np.random.default_rng(44)
        for trial in range(20):
            X, y, classes = random_instance(rng)
            feat, thr, gain = best_split(X, y, classes, min_samples_leaf=3)
            if feat < 0:
                continue
            nl = int((X[:, feat] <= thr).sum())
            assert nl >= 3 and len(y) - nl >= 3
            assert gain > 0

    def test_constant_feature_unsplittable(self):
        X = np.ones((10, 1))
        y = np.array([0, 1] * 5)
        assert best_split(X, y, 2)[0] == -1

    def test_pure_node_unsplittable(self):
        X = np.arange(8.0).reshape(8, 1)
        y = np.zeros(8, dtype=int)
        assert best_split(X, y, 2)[0] == -1

    def test_perfect_separator_found(self):
        X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        feat, thr, gain = best_split(X, y, 2)
        assert feat == 0
        assert thr == pytest.approx(6.0)
        assert gain == pytest.approx(0.5)

    def test_feature_subset_restricts_columns(self):
        # column 1 separates perfectly but is outside the subset
        X = np.column_stack([np.array([0.0, 1, 0, 1]), np.array([0.0, 0, 1, 1])])
        y = np.array([0, 0, 1, 1])
        feat, _, _ = best_split(X, y, 2, feature_subset=[0])
        assert feat != 1


class TestFitForest:
    def test_deterministic_given_seed(self):
        X, y = blobs(15, 3, 3, seed=0)
        a = fit_forest(X, y, params=ForestParams(n_trees=10), seed=7)
        b = fit_forest(X, y, params=ForestParams(n_trees=10), seed=7)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.thresholds, b.thresholds)
        assert np.array_equal(a.leaf_dist, b.leaf_dist)

    def test_seed_changes_forest(self):
        X, y = blobs(15, 3, 3, seed=0)
        a = fit_forest(X, y, params=ForestParams(n_trees=10), seed=7)
        b = fit_forest(X, y, params=ForestParams(n_trees=10), seed=8)
        same = a.node_count == b.node_count and np.array_equal(a.thresholds, b.thresholds)
        assert not same

    def test_trees_are_independent_of_count(self):
        # tree t only consumes stream (seed, t), so prefixes agree
        X, y = blobs(10, 2, 2, seed=1)
        small = fit_forest(X, y, params=ForestParams(n_trees=3), seed=5)
        big = fit_forest(X, y, params=ForestParams(n_trees=6), seed=5)
        cut = small.offsets[-1]
        assert np.array_equal(small.features, big.features[:cut])
        assert np.array_equal(small.thresholds, big.thresholds[:cut])

    def test_offsets_shape(self):
        X, y = blobs(10, 2, 2, seed=2)
        f = fit_forest(X, y, params=ForestParams(n_trees=8), seed=0)
        assert f.offsets.shape == (9,)
        assert f.offsets[0] == 0
        assert f.offsets[-1] == f.node_count
        assert np.all(np.diff(f.offsets) >= 1)

    def test_memorizes_separable_training_data(self):
        X, y = blobs(20, 4, 3, seed=3, spread=0.3)
        f = fit_forest(X, y, params=ForestParams(n_trees=30), seed=1)
        acc = float((predict(f, X) == y).mean())
        assert acc >= 0.95

    def test_depth_cap_bounds_node_count(self):
        X, y = blobs(30, 3, 2, seed=4)
        f = fit_forest(X, y, params=ForestParams(n_trees=5, max_depth=1), seed=0)
        assert f.node_count <= 5 * 3

    def test_min_samples_leaf_shrinks_tree(self):
        X, y = blobs(30, 3, 3, seed=5, spread=2.0)
        deep = fit_forest(X, y, params=ForestParams(n_trees=5), seed=0)
        shallow = fit_forest(
            X, y, params=ForestParams(n_trees=5, min_samples_leaf=10), seed=0
        )
        assert shallow.node_count < deep.node_count

    def test_max_features_resolves_to_sqrt(self):
        X, y = blobs(10, 9, 2, seed=6)
        f = fit_forest(X, y, seed=0)
        assert f.params.max_features == 3
        X, y = blobs(10, 10, 2, seed=6)
        f = fit_forest(X, y, seed=0)
        assert f.params.max_features == 4  # ceil(sqrt(10))

    def test_single_class_labels_with_explicit_count(self):
        X = np.random.default_rng(0).normal(size=(12, 3))
        y = np.zeros(12, dtype=int)
        f = fit_forest(X, y, n_classes=2, params=ForestParams(n_trees=3), seed=0)
        proba = predict_proba(f, X)
        assert np.allclose(proba[:, 0], 1.0)

    def test_validation_errors(self):
        X = np.ones((4, 2))
        with pytest.raises(ValueError, match="NaN"):
            fit_forest(np.array([[np.nan, 1.0]] * 4), np.array([0, 1, 0, 1]))
        with pytest.raises(ValueError, match="length"):
            fit_forest(X, np.array([0, 1]))
        with pytest.raises(ValueError, match="nonnegative"):
            fit_forest(X, np.array([0, -1, 0, 1]))
        with pytest.raises(ValueError, match="two classes"):
            fit_forest(X, np.zeros(4, dtype=int))
        with pytest.raises(ValueError, match="n_classes"):
            fit_forest(X, np.array([0, 1, 2, 3]), n_classes=3)
        with pytest.raises(ValueError, match="max_features"):
            fit_forest(X, np.array([0, 1, 0, 1]), params=ForestParams(max_features=5))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ForestParams(n_trees=0)
        with pytest.raises(ValueError):
            ForestParams(max_depth=0)
        with pytest.raises(ValueError):
            ForestParams(min_samples_leaf=0)


class TestPredict:
    def test_posterior_rows_sum_to_one(self):
        X, y = blobs(15, 3, 4, seed=7, spread=1.5)
        f = fit_forest(X, y, params=ForestParams(n_trees=20), seed=2)
        proba = predict_proba(f, X)
        assert proba.shape == (60, 4)
        assert np.all(proba >= 0)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)

    def test_tie_goes_to_lowest_class(self):
        # two single-leaf trees voting for different classes: exact 0.5/0.5
        stump = dict(
            features=np.array([-1, -1], dtype=np.int64),
            thresholds=np.zeros(2),
            lefts=np.array([-1, -1], dtype=np.int64),
            rights=np.array([-1, -1], dtype=np.int64),
            leaf_dist=np.array([[1.0, 0.0], [0.0, 1.0]]),
            offsets=np.array([0, 1, 2], dtype=np.int64),
        )
        f = Forest(
            params=ForestParams(n_trees=2, max_features=1),
            seed=0, n_features_in=1, n_classes=2, **stump,
        )
        proba = predict_proba(f, np.zeros((3, 1)))
        assert np.allclose(proba, 0.5)
        assert np.array_equal(predict(f, np.zeros((3, 1))), [0, 0, 0])

    def test_shape_mismatch_rejected(self):
        X, y = blobs(10, 3, 2, seed=8)
        f = fit_forest(X, y, params=ForestParams(n_trees=3), seed=0)
        with pytest.raises(ValueError, match="matrix"):
            predict_proba(f, np.ones((4, 2)))

    def test_nan_rejected(self):
        X, y = blobs(10, 2, 2, seed=9)
        f = fit_forest(X, y, params=ForestParams(n_trees=3), seed=0)
        with pytest.raises(ValueError, match="NaN"):
            predict_proba(f, np.array([[1.0, np.nan]]))

    def test_held_out_accuracy_beats_chance(self):
        rng = np.random.default_rng(12)
        centers = rng.normal(scale=4.0, size=(3, 4))
        Xtr = np.vstack([centers[c] + rng.normal(scale=0.8, size=(25, 4)) for c in range(3)])
        ytr = np.repeat(np.arange(3), 25)
        Xte = np.vstack([centers[c] + rng.normal(scale=0.8, size=(10, 4)) for c in range(3)])
        yte = np.repeat(np.arange(3), 10)
        f = fit_forest(Xtr, ytr, params=ForestParams(n_trees=30), seed=3)
        acc = float((predict(f, Xte) == yte).mean())
        assert acc >= 0.8


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        X, y = blobs(15, 3, 3, seed=13)
        f = fit_forest(X, y, params=ForestParams(n_trees=12, max_depth=6), seed=9)
        path = tmp_path / "teacher.npz"
        f.save(path)
        g = Forest.load(path)
        assert g.params == f.params
        assert g.seed == f.seed
        assert g.n_classes == f.n_classes
        assert g.n_features_in == f.n_features_in
        for name in ("features", "thresholds", "lefts", "rights", "leaf_dist", "offsets"):
            assert np.array_equal(getattr(g, name), getattr(f, name))
        assert np.array_equal(predict_proba(g, X), predict_proba(f, X))

    def test_wrong_kind_rejected(self, tmp_path):
        from forestdistill.model_io import save_model

        path = tmp_path / "other.npz"
        save_model(path, "mlp", {}, {"w": np.zeros(2)})
        with pytest.raises(ValueError, match="expected 'forest'"):
            Forest.load(path)

    def test_not_a_container_rejected(self, tmp_path):
        path = tmp_path / "junk.npz"
        np.savez(path, a=np.zeros(3))
        with pytest.raises(ValueError, match="container"):
            Forest.load(path)
