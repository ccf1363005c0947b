"""Random-forest classifier trained from scratch on numeric matrices.

Trees are grown with CART on Gini impurity: bootstrap rows, a fresh
feature subset at every node, midpoint thresholds between consecutive
distinct sorted values.  Fitted trees live in flat arrays so prediction
is a tight loop (see _kernels), and the whole forest serializes through
the shared model container.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from ._kernels import apply_forest, split_scan
from .model_io import load_model, save_model


@dataclass(frozen=True)
class ForestParams:
    """Forest hyperparameters.

    max_depth None means unlimited; max_features None resolves to
    ceil(sqrt(d)) when fitting.
    """

    n_trees: int = 100
    max_depth: int = None
    min_samples_leaf: int = 1
    max_features: int = None

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be None or at least 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be None or at least 1")


@dataclass(frozen=True)
class Forest:
    """A fitted forest: flat node arrays plus the recipe that built it.

    Node rows for tree t are offsets[t]:offsets[t+1] with the root first;
    features[i] == -1 marks a leaf, whose class distribution is
    leaf_dist[i].  lefts/rights hold global node row ids.
    """

    params: ForestParams
    seed: int
    n_features_in: int
    n_classes: int
    features: np.ndarray
    thresholds: np.ndarray
    lefts: np.ndarray
    rights: np.ndarray
    leaf_dist: np.ndarray
    offsets: np.ndarray

    @property
    def node_count(self):
        return int(self.features.shape[0])

    def save(self, path):
        meta = {
            "n_trees": self.params.n_trees,
            "max_depth": self.params.max_depth,
            "min_samples_leaf": self.params.min_samples_leaf,
            "max_features": self.params.max_features,
            "seed": self.seed,
            "n_features_in": self.n_features_in,
            "n_classes": self.n_classes,
        }
        arrays = {
            "features": self.features,
            "thresholds": self.thresholds,
            "lefts": self.lefts,
            "rights": self.rights,
            "leaf_dist": self.leaf_dist,
            "offsets": self.offsets,
        }
        save_model(path, "forest", meta, arrays)

    @classmethod
    def load(cls, path):
        _, meta, arrays = load_model(path, expect_kind="forest")
        params = ForestParams(
            n_trees=meta["n_trees"],
            max_depth=meta["max_depth"],
            min_samples_leaf=meta["min_samples_leaf"],
            max_features=meta["max_features"],
        )
        return cls(
            params=params,
            seed=meta["seed"],
            n_features_in=meta["n_features_in"],
            n_classes=meta["n_classes"],
            features=arrays["features"],
            thresholds=arrays["thresholds"],
            lefts=arrays["lefts"],
            rights=arrays["rights"],
            leaf_dist=arrays["leaf_dist"],
            offsets=arrays["offsets"],
        )


def gini(labels, n_classes):
    """Gini impurity 1 - sum_c p_c^2 of an integer label vector."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("gini of an empty set is undefined")
    counts = np.bincount(labels, minlength=n_classes)
    s = 0.0
    for c in range(n_classes):
        p = counts[c] / labels.size
        s += p * p
    return 1.0 - s


def best_split(X, y, n_classes, min_samples_leaf=1, feature_subset=None):
    """Best Gini split of a node.

    Scans the given feature columns (all, when feature_subset is None)
    and every midpoint between consecutive distinct sorted values; a
    split must strictly reduce weighted impurity and leave at least
    min_samples_leaf rows per side.  Returns (feature, threshold, gain)
    with feature == -1 when no such split exists.  Exact gain ties keep
    the first candidate in (feature order, ascending threshold) order.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if feature_subset is None:
        cols = np.arange(X.shape[1], dtype=np.int64)
    else:
        cols = np.asarray(feature_subset, dtype=np.int64)
    values = np.ascontiguousarray(X[:, cols])
    col, thr, gain = split_scan(values, y, n_classes, min_samples_leaf)
    if col < 0:
        return -1, 0.0, 0.0
    return int(cols[col]), float(thr), float(gain)


def _grow_tree(X, y, n_classes, params, mtry, rng, features, thresholds, lefts, rights, leaf_dist):
    """Append one tree's nodes to the flat lists; returns nothing.

    Depth-first, left child first; the feature subset at each node comes
    from `rng` in visit order, so the tree is a pure function of the
    bootstrap sample and the stream state.
    """
    n, d = X.shape
    boot = rng.integers(0, n, size=n)
    Xb = X[boot]
    yb = y[boot]

    max_depth = params.max_depth
    min_leaf = params.min_samples_leaf

    # (row-index array, depth, parent node id, is-left-child)
    stack = [(np.arange(n, dtype=np.int64), 0, -1, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        node = len(features)
        if parent >= 0:
            if is_left:
                lefts[parent] = node
            else:
                rights[parent] = node
        features.append(-1)
        thresholds.append(0.0)
        lefts.append(-1)
        rights.append(-1)
        counts = np.bincount(yb[rows], minlength=n_classes)
        leaf_dist.append(counts / rows.size)

        pure = counts.max() == rows.size
        depth_capped = max_depth is not None and depth >= max_depth
        if pure or depth_capped or rows.size < 2 * min_leaf:
            continue

        subset = np.sort(rng.choice(d, size=mtry, replace=False))
        values = np.ascontiguousarray(Xb[rows][:, subset])
        col, thr, _ = split_scan(values, yb[rows], n_classes, min_leaf)
        if col < 0:
            continue
        feat = int(subset[col])
        go_left = Xb[rows, feat] <= thr
        # a midpoint of two adjacent floats can round onto the upper value
        # and sweep every row left; keep the node a leaf in that case
        if go_left.all() or not go_left.any():
            continue
        features[node] = feat
        thresholds[node] = thr
        # right pushed first so the left child is emitted next
        stack.append((rows[~go_left], depth + 1, node, False))
        stack.append((rows[go_left], depth + 1, node, True))


def fit_forest(X, y, n_classes=None, params=None, seed=0):
    """Fit a forest on an (n, d) float matrix and integer labels.

    Each tree draws its bootstrap rows and per-node feature subsets from
    its own stream seeded by (seed, tree index), so the result does not
    depend on training order.  n_classes defaults to max(y) + 1.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-dimensional")
    n, d = X.shape
    if n < 1 or d < 1:
        raise ValueError("need at least one row and one column")
    if y.shape != (n,):
        raise ValueError("label vector length does not match rows")
    if np.isnan(X).any():
        raise ValueError("features contain NaN; impute before fitting")
    if y.min() < 0:
        raise ValueError("labels must be nonnegative")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if n_classes < 2:
        raise ValueError("need at least two classes")
    if y.max() >= n_classes:
        raise ValueError("labels must lie in [0, n_classes)")
    params = params or ForestParams()
    mtry = params.max_features
    if mtry is None:
        mtry = math.ceil(math.sqrt(d))
    if mtry > d:
        raise ValueError(f"max_features {mtry} exceeds feature count {d}")
    resolved = replace(params, max_features=mtry)

    features = []
    thresholds = []
    lefts = []
    rights = []
    leaf_dist = []
    offsets = [0]
    for t in range(resolved.n_trees):
        rng = np.random.default_rng([seed, t])
        _grow_tree(
            X, y, n_classes, resolved, mtry, rng,
            features, thresholds, lefts, rights, leaf_dist,
        )
        offsets.append(len(features))

    return Forest(
        params=resolved,
        seed=seed,
        n_features_in=d,
        n_classes=n_classes,
        features=np.array(features, dtype=np.int64),
        thresholds=np.array(thresholds, dtype=np.float64),
        lefts=np.array(lefts, dtype=np.int64),
        rights=np.array(rights, dtype=np.int64),
        leaf_dist=np.array(leaf_dist, dtype=np.float64),
        offsets=np.array(offsets, dtype=np.int64),
    )


def predict_proba(forest, X):
    """Class posteriors: mean leaf distribution over trees, rows sum to 1."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != forest.n_features_in:
        raise ValueError(
            f"expected (n, {forest.n_features_in}) matrix, got {X.shape}"
        )
    if np.isnan(X).any():
        raise ValueError("features contain NaN; impute before predicting")
    return apply_forest(
        X,
        forest.features,
        forest.thresholds,
        forest.lefts,
        forest.rights,
        forest.leaf_dist,
        forest.offsets,
    )


def predict(forest, X):
    """Hard labels: argmax posterior, exact ties to the lowest class id."""
    return np.argmax(predict_proba(forest, X), axis=1).astype(np.int64)
