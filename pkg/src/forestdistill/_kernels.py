"""Hot numeric kernels: CART split scanning and forest traversal.

Two interchangeable backends live here:

* a numba ``@njit`` backend (default when numba imports cleanly), and
* a pure-numpy fallback, selected by setting the environment variable
  ``FORESTDISTILL_DISABLE_NUMBA=1`` before import (or used automatically
  when numba is unavailable).

Both backends are written to produce bit-identical floats: integer class
counts feed the same IEEE expressions in the same order, so fitted models
and predictions do not depend on the backend.  ``benchmarks/bench_kernels.py``
times one against the other.
"""

import os

import numpy as np

_ENV_FLAG = "FORESTDISTILL_DISABLE_NUMBA"


def _numba_disabled():
    return os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


# ---------------------------------------------------------------------------
# loop implementations (numba-compilable, also runnable as plain python)
# ---------------------------------------------------------------------------

def _split_scan_loops(values, labels, n_classes, min_leaf):
    """Best (feature, threshold) over candidate midpoints, loop form.

    values: (m, f) float64, one column per candidate feature (node rows).
    labels: (m,) int64 class ids.
    Returns (feature_col, threshold, gain); feature_col is -1 when no
    split has positive gain.  Candidate thresholds are midpoints between
    consecutive distinct sorted values; children smaller than min_leaf
    are skipped.  Ties resolve to the first candidate in (column,
    ascending threshold) order.
    """
    m = values.shape[0]
    n_feats = values.shape[1]

    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(m):
        total[labels[i]] += 1
    s = 0.0
    for c in range(n_classes):
        p = total[c] / m
        s += p * p
    parent = 1.0 - s

    best_feat = -1
    best_thr = 0.0
    best_gain = 0.0

    counts_left = np.zeros(n_classes, dtype=np.int64)
    for j in range(n_feats):
        order = np.argsort(values[:, j])
        for c in range(n_classes):
            counts_left[c] = 0
        for i in range(1, m):
            prev = order[i - 1]
            counts_left[labels[prev]] += 1
            v0 = values[prev, j]
            v1 = values[order[i], j]
            if v0 == v1:
                continue
            nl = i
            nr = m - i
            if nl < min_leaf or nr < min_leaf:
                continue
            sl = 0.0
            sr = 0.0
            for c in range(n_classes):
                pl = counts_left[c] / nl
                sl += pl * pl
                pr = (total[c] - counts_left[c]) / nr
                sr += pr * pr
            gl = 1.0 - sl
            gr = 1.0 - sr
            gain = parent - (nl / m) * gl - (nr / m) * gr
            if gain > best_gain:
                best_gain = gain
                best_feat = j
                best_thr = 0.5 * (v0 + v1)
    return best_feat, best_thr, best_gain


def _apply_forest_loops(X, features, thresholds, lefts, rights, leaf_dist, offsets):
    """Average leaf class distribution over all trees, loop form.

    Tree t occupies node rows offsets[t]:offsets[t+1]; feature == -1
    marks a leaf.  Returns (m, C) posteriors.
    """
    m = X.shape[0]
    n_trees = offsets.shape[0] - 1
    C = leaf_dist.shape[1]
    out = np.zeros((m, C), dtype=np.float64)
    for t in range(n_trees):
        root = offsets[t]
        for i in range(m):
            node = root
            while features[node] >= 0:
                if X[i, features[node]] <= thresholds[node]:
                    node = lefts[node]
                else:
                    node = rights[node]
            for c in range(C):
                out[i, c] += leaf_dist[node, c]
    for i in range(m):
        for c in range(C):
            out[i, c] /= n_trees
    return out


# ---------------------------------------------------------------------------
# pure-numpy fallback backend
# ---------------------------------------------------------------------------

def _split_scan_numpy(values, labels, n_classes, min_leaf):
    """Vectorized twin of :func:`_split_scan_loops` (same floats)."""
    m = values.shape[0]
    n_feats = values.shape[1]

    total = np.bincount(labels, minlength=n_classes).astype(np.int64)
    s = 0.0
    for c in range(n_classes):
        p = total[c] / m
        s += p * p
    parent = 1.0 - s

    best_feat = -1
    best_thr = 0.0
    best_gain = 0.0

    classes = np.arange(n_classes, dtype=np.int64)
    positions = np.arange(1, m, dtype=np.int64)
    for j in range(n_feats):
        order = np.argsort(values[:, j])
        sv = values[order, j]
        sl = labels[order]
        # counts_left[i-1, c] = #{labels[order[:i]] == c}, split positions 1..m-1
        counts_left = np.cumsum((sl[:-1, None] == classes[None, :]).astype(np.int64), axis=0)
        nl = positions
        nr = m - positions
        valid = (sv[:-1] != sv[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        # class loop kept sequential so rounding matches the loop backend
        ssl = np.zeros(m - 1, dtype=np.float64)
        ssr = np.zeros(m - 1, dtype=np.float64)
        for c in range(n_classes):
            pl = counts_left[:, c] / nl
            ssl += pl * pl
            pr = (total[c] - counts_left[:, c]) / nr
            ssr += pr * pr
        gains = parent - (nl / m) * (1.0 - ssl) - (nr / m) * (1.0 - ssr)
        gains[~valid] = -np.inf
        pos = int(np.argmax(gains))
        gain = gains[pos]
        if gain > best_gain:
            best_gain = float(gain)
            best_feat = j
            best_thr = float(0.5 * (sv[pos] + sv[pos + 1]))
    return best_feat, best_thr, best_gain


def _apply_forest_numpy(X, features, thresholds, lefts, rights, leaf_dist, offsets):
    """Vectorized twin of :func:`_apply_forest_loops` (same floats)."""
    m = X.shape[0]
    n_trees = offsets.shape[0] - 1
    C = leaf_dist.shape[1]
    rows = np.arange(m)
    out = np.zeros((m, C), dtype=np.float64)
    for t in range(n_trees):
        cur = np.full(m, offsets[t], dtype=np.int64)
        while True:
            f = features[cur]
            active = f >= 0
            if not active.any():
                break
            idx = rows[active]
            node = cur[active]
            go_left = X[idx, f[active]] <= thresholds[node]
            cur[active] = np.where(go_left, lefts[node], rights[node])
        out += leaf_dist[cur]
    out /= n_trees
    return out


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

HAVE_NUMBA = False
_split_scan_numba = None
_apply_forest_numba = None

if not _numba_disabled():
    try:
        from numba import njit

        _split_scan_numba = njit(cache=True)(_split_scan_loops)
        _apply_forest_numba = njit(cache=True)(_apply_forest_loops)
        HAVE_NUMBA = True
    except ImportError:
        HAVE_NUMBA = False

if HAVE_NUMBA:
    split_scan = _split_scan_numba
    apply_forest = _apply_forest_numba
    ACTIVE_BACKEND = "numba"
else:
    split_scan = _split_scan_numpy
    apply_forest = _apply_forest_numpy
    ACTIVE_BACKEND = "numpy"


def warmup():
    """Force JIT compilation of the active kernels (no-op on numpy)."""
    X = np.array([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]])
    y = np.array([0, 1, 1], dtype=np.int64)
    split_scan(X, y, 2, 1)
    feats = np.array([0, -1, -1], dtype=np.int64)
    thr = np.array([0.5, 0.0, 0.0])
    lefts = np.array([1, -1, -1], dtype=np.int64)
    rights = np.array([2, -1, -1], dtype=np.int64)
    dist = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    offs = np.array([0, 3], dtype=np.int64)
    apply_forest(X, feats, thr, lefts, rights, dist, offs)
