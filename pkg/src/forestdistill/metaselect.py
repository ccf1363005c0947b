"""Dataset metafeatures and automatic per-task student selection.

A fixed vector of dataset descriptors (counts, class balance, column
moment aggregates, rotation spectrum) feeds a forest classifier that
predicts which student config from a candidate set will win on an
unseen task.  Evaluation is cross-validated over tasks: a task's row
never reaches the model that predicts for it.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .data import CATEGORICAL, fit_pca, impute_mean
from .forest import ForestParams, fit_forest, predict
from .portfolio import best_subset_score
from .seeding import ROLE_SELECTOR, rng_from, seed_int

METAFEATURES_VERSION = 1

METAFEATURE_NAMES = (
    "n_instances",
    "log_n_instances",
    "n_features",
    "log_n_features",
    "n_classes",
    "missing_ratio",
    "features_per_instance",
    "instances_per_feature",
    "class_entropy_bits",
    "class_entropy_normalized",
    "min_class_proportion",
    "max_class_proportion",
    "std_class_proportion",
    "mean_of_column_means",
    "std_of_column_means",
    "min_of_column_means",
    "max_of_column_means",
    "mean_of_column_stds",
    "std_of_column_stds",
    "min_of_column_stds",
    "max_of_column_stds",
    "mean_of_column_skewness",
    "std_of_column_skewness",
    "min_of_column_skewness",
    "max_of_column_skewness",
    "mean_of_column_kurtosis",
    "std_of_column_kurtosis",
    "min_of_column_kurtosis",
    "max_of_column_kurtosis",
    "pca_top1_variance_fraction",
    "pca_top3_variance_fraction",
    "categorical_ratio",
)

_MOMENT_EPS = 1e-12


def _column_moments(values):
    """(mean, std, skewness, excess kurtosis) of one observed-cell vector.

    Degenerate statistics (fewer than 2 values, or zero variance) clamp
    to 0 so every descriptor stays finite.
    """
    if values.size == 0:
        return 0.0, 0.0, 0.0, 0.0
    mean = float(values.mean())
    centered = values - mean
    m2 = float((centered**2).mean())
    if m2 <= _MOMENT_EPS:
        return mean, 0.0, 0.0, 0.0
    std = float(np.sqrt(m2))
    skew = float((centered**3).mean() / m2**1.5)
    kurt = float((centered**4).mean() / m2**2 - 3.0)
    return mean, std, skew, kurt


def _aggregate(per_column):
    arr = np.array(per_column, dtype=np.float64)
    return [float(arr.mean()), float(arr.std()), float(arr.min()), float(arr.max())]


def extract_metafeatures(ds):
    """Descriptor vector for one task, in METAFEATURE_NAMES order.

    Column moments use only observed cells; the rotation spectrum is
    computed after mean imputation.  Every entry is finite.
    """
    n, d = ds.features.shape
    values = {
        "n_instances": float(n),
        "log_n_instances": float(np.log(n)),
        "n_features": float(d),
        "log_n_features": float(np.log(d)),
        "n_classes": float(ds.class_count),
        "missing_ratio": float(ds.missing_mask.mean()),
        "features_per_instance": float(d / n),
        "instances_per_feature": float(n / d),
    }

    props = np.bincount(ds.labels, minlength=ds.class_count) / n
    nonzero = props[props > 0]
    entropy = float(-(nonzero * np.log2(nonzero)).sum())
    values["class_entropy_bits"] = entropy
    values["class_entropy_normalized"] = entropy / float(np.log2(ds.class_count))
    values["min_class_proportion"] = float(props.min())
    values["max_class_proportion"] = float(props.max())
    values["std_class_proportion"] = float(props.std())

    moments = [
        _column_moments(ds.features[~ds.missing_mask[:, j], j]) for j in range(d)
    ]
    for stat, name in zip(range(4), ("means", "stds", "skewness", "kurtosis")):
        agg = _aggregate([m[stat] for m in moments])
        for prefix, value in zip(("mean", "std", "min", "max"), agg):
            values[f"{prefix}_of_column_{name}"] = value

    with warnings.catch_warnings():
        # an all-missing column already shows up in missing_ratio; the
        # imputer's warning is noise during feature extraction
        warnings.simplefilter("ignore")
        filled = impute_mean(ds)
    total = 0.0
    if n >= 2:
        pca = fit_pca(filled.features)
        total = float(pca.explained_variance.sum())
    if total <= _MOMENT_EPS:
        values["pca_top1_variance_fraction"] = 0.0
        values["pca_top3_variance_fraction"] = 0.0
    else:
        var = pca.explained_variance
        values["pca_top1_variance_fraction"] = float(var[0] / total)
        values["pca_top3_variance_fraction"] = float(var[: min(3, d)].sum() / total)

    kinds = np.array([k == CATEGORICAL for k in ds.feature_kinds])
    values["categorical_ratio"] = float(kinds.mean())

    vec = np.array([values[name] for name in METAFEATURE_NAMES])
    if not np.isfinite(vec).all():
        bad = [METAFEATURE_NAMES[i] for i in np.nonzero(~np.isfinite(vec))[0]]
        raise AssertionError(f"non-finite metafeatures {bad}")
    return vec


# ---------------------------------------------------------------------------
# selector training and evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectorModel:
    """One fold's selector: a forest over config-id classes (or a constant)."""

    vocabulary: tuple
    forest: object = None
    constant: str = None

    def predict_ids(self, features):
        if self.constant is not None:
            return [self.constant] * features.shape[0]
        classes = predict(self.forest, features)
        return [self.vocabulary[c] for c in classes]


@dataclass(frozen=True)
class SelectorRun:
    """Cross-validated selector: per-fold models and held-out predictions."""

    task_names: tuple
    candidate_ids: tuple
    fold_of: np.ndarray
    models: tuple
    predictions: tuple  # per task, from the model that never saw it
    targets: tuple      # per task, the true best candidate


def best_config_targets(pm, candidate_ids):
    """Per-task best candidate, exact ties to the lexicographically lowest id."""
    cols = pm.columns_for(candidate_ids)
    sub = pm.values[:, cols]
    targets = []
    for t in range(pm.n_tasks):
        row = sub[t]
        best = row.max()
        tied = [candidate_ids[j] for j in np.nonzero(row == best)[0]]
        targets.append(min(tied))
    return tuple(targets)


def _task_folds(n_tasks, k, seed):
    # deliberately label-agnostic: fold membership must not depend on the
    # performance matrix, or held-out predictions would leak target info
    rng = rng_from(seed, ROLE_SELECTOR, "folds")
    fold_of = np.empty(n_tasks, dtype=np.int64)
    for pos, task in enumerate(rng.permutation(n_tasks)):
        fold_of[task] = pos % k
    return fold_of


def train_selector(features, pm, candidate_ids, k=10, seed=0, selector_params=None):
    """Cross-validate a config-choosing forest over tasks.

    features is the (T, F) metafeature matrix aligned with pm's tasks.
    For each of k folds, a forest is fit on the other folds' tasks
    (target: best candidate per task) and predicts for the held-out
    tasks.  Requires at least two tasks per fold.
    """
    features = np.asarray(features, dtype=np.float64)
    candidate_ids = tuple(candidate_ids)
    if not candidate_ids:
        raise ValueError("candidate set must be nonempty")
    T = pm.n_tasks
    if features.shape[0] != T:
        raise ValueError("metafeature rows do not match task count")
    if k < 2:
        raise ValueError("fold count must be at least 2")
    if T < 2 * k:
        raise ValueError(f"{T} tasks cannot fill {k} folds with 2 tasks each")

    targets = best_config_targets(pm, candidate_ids)
    vocab = candidate_ids
    class_of = {cid: i for i, cid in enumerate(vocab)}
    y = np.array([class_of[t] for t in targets], dtype=np.int64)
    fold_of = _task_folds(T, k, seed)
    params = selector_params or ForestParams()

    models = []
    predictions = [None] * T
    for fold in range(k):
        train_mask = fold_of != fold
        test_idx = np.nonzero(~train_mask)[0]
        if len(vocab) == 1:
            model = SelectorModel(vocabulary=vocab, constant=vocab[0])
        else:
            forest = fit_forest(
                features[train_mask], y[train_mask], n_classes=len(vocab),
                params=params, seed=seed_int(seed, ROLE_SELECTOR, fold),
            )
            model = SelectorModel(vocabulary=vocab, forest=forest)
        models.append(model)
        for task, cid in zip(test_idx, model.predict_ids(features[test_idx])):
            predictions[task] = cid

    return SelectorRun(
        task_names=pm.task_names,
        candidate_ids=vocab,
        fold_of=fold_of,
        models=tuple(models),
        predictions=tuple(predictions),
        targets=targets,
    )


@dataclass(frozen=True)
class SelectorReport:
    """How the cross-validated selections score against the oracle subset."""

    candidate_ids: tuple
    selected_score: float      # mean accuracy of the chosen config per task
    subset_score: float        # oracle: best_subset_score over the candidates
    selection_accuracy: float  # fraction of tasks where the true best was chosen

    @property
    def curve_point(self):
        return (len(self.candidate_ids), self.selected_score)


def evaluate_selector(run, pm):
    """Score held-out selections; never exceeds the candidate-set oracle."""
    if any(p is None for p in run.predictions):
        raise ValueError("missing held-out predictions")
    index = {cid: j for j, cid in enumerate(pm.config_ids)}
    chosen = np.array([
        pm.values[t, index[cid]] for t, cid in enumerate(run.predictions)
    ])
    hits = np.array([
        run.predictions[t] == run.targets[t] for t in range(pm.n_tasks)
    ])
    return SelectorReport(
        candidate_ids=run.candidate_ids,
        selected_score=float(chosen.mean()),
        subset_score=best_subset_score(pm, run.candidate_ids),
        selection_accuracy=float(hits.mean()),
    )
