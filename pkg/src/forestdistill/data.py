"""Tabular dataset loading, mean imputation, PCA, stratified folds.

The preprocessing chain mirrors a fixed three-primitive pipeline:
mean-impute missing cells, rotate with PCA, then hand the matrix to a
classifier.  Imputation and PCA are always fit on training rows only and
applied to held-out rows to avoid leakage.
"""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

MISSING_TOKENS = ("", "?")

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Dataset:
    """One tabular classification task, fully numeric.

    features holds NaN exactly where missing_mask is True.  Categorical
    source columns are one-hot expanded at load time; feature_kinds tags
    each expanded column with the kind of the column it came from.
    """

    features: np.ndarray
    missing_mask: np.ndarray
    labels: np.ndarray
    feature_kinds: tuple
    class_count: int
    name: str

    def __post_init__(self):
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise ValueError("dataset must have at least one row and one column")
        if self.class_count < 2:
            raise ValueError("dataset must have at least two classes")
        if self.labels.shape != (n,):
            raise ValueError("labels length does not match feature rows")
        if self.labels.min() < 0 or self.labels.max() >= self.class_count:
            raise ValueError("labels must lie in [0, class_count)")
        if self.missing_mask.shape != (n, d):
            raise ValueError("missing_mask shape does not match features")
        if len(self.feature_kinds) != d:
            raise ValueError("feature_kinds length does not match columns")
        if not np.array_equal(np.isnan(self.features), self.missing_mask):
            raise ValueError("missing_mask must mark exactly the NaN cells")

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def subset(self, indices):
        """Row subset as a new Dataset (class vocabulary unchanged)."""
        idx = np.asarray(indices)
        return Dataset(
            features=self.features[idx],
            missing_mask=self.missing_mask[idx],
            labels=self.labels[idx],
            feature_kinds=self.feature_kinds,
            class_count=self.class_count,
            name=self.name,
        )


@dataclass(frozen=True)
class PcaModel:
    """Principal axes of a sample covariance: orthonormal rows, mean, variances."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of each sample to one of k stratified folds."""

    fold_of: np.ndarray
    k: int

    def test_indices(self, fold):
        return np.nonzero(self.fold_of == fold)[0]

    def train_indices(self, fold):
        return np.nonzero(self.fold_of != fold)[0]


@dataclass(frozen=True)
class TaskSpec:
    """One manifest entry: where a task's file lives and how to read it."""

    name: str
    path: str
    label_column: str = None
    kinds: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _sniff_delimiter(header_line):
    counts = {delim: header_line.count(delim) for delim in (",", ";", "\t", "|")}
    best = max(counts, key=counts.get)
    return best if counts[best] > 0 else ","


def _is_missing(cell):
    return cell.strip() in MISSING_TOKENS


def _parses_numeric(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_table(path, schema=None, label_column=None, name=None, delimiter=None):
    """Load a delimited text file with a header row into a Dataset.

    Empty cells and "?" are treated as missing.  Columns where every
    non-missing cell parses as a float are numeric; all others are
    categorical and get one-hot expanded (categories in first-appearance
    order).  The label column is `label_column` when given, else the
    last column; its values are factorized to 0..C-1 in first-appearance
    order.  `schema` maps column names to "numeric"/"categorical" to
    override inference.

    Raises ValueError on an empty table, a single-class label column, a
    missing label cell, or an unknown column name.
    """
    schema = dict(schema or {})
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            first = fh.readline()
            if not first.strip():
                raise ValueError(f"{path}: empty file")
            delim = delimiter or _sniff_delimiter(first)
            fh.seek(0)
            reader = csv.reader(fh, delimiter=delim)
            rows = [row for row in reader if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise ValueError(f"cannot read dataset file {path}: {exc}") from exc

    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: no data rows")
    n_cols = len(header)
    for i, row in enumerate(body):
        if len(row) != n_cols:
            raise ValueError(f"{path}: row {i + 1} has {len(row)} cells, expected {n_cols}")

    if label_column is None:
        label_idx = n_cols - 1
    else:
        if label_column not in header:
            raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)

    unknown = set(schema) - set(header)
    if unknown:
        raise ValueError(f"{path}: schema names unknown columns {sorted(unknown)}")

    raw_labels = [row[label_idx].strip() for row in body]
    if any(_is_missing(v) for v in raw_labels):
        bad = next(i for i, v in enumerate(raw_labels) if _is_missing(v))
        raise ValueError(f"{path}: missing label in data row {bad}")
    label_vocab = []
    seen = {}
    for v in raw_labels:
        if v not in seen:
            seen[v] = len(label_vocab)
            label_vocab.append(v)
    if len(label_vocab) < 2:
        raise ValueError(f"{path}: label column has a single class {label_vocab!r}")
    labels = np.array([seen[v] for v in raw_labels], dtype=np.int64)

    feature_cols = [j for j in range(n_cols) if j != label_idx]
    if not feature_cols:
        raise ValueError(f"{path}: no feature columns")

    blocks = []
    mask_blocks = []
    kinds = []
    for j in feature_cols:
        cells = [row[j].strip() for row in body]
        present = [c for c in cells if not _is_missing(c)]
        kind = schema.get(header[j])
        if kind is None:
            kind = NUMERIC if present and all(_parses_numeric(c) for c in present) else CATEGORICAL
        elif kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"{path}: bad kind {kind!r} for column {header[j]!r}")
        if kind == NUMERIC:
            col = np.array([np.nan if _is_missing(c) else float(c) for c in cells])
            blocks.append(col[:, None])
            mask_blocks.append(np.isnan(col)[:, None])
            kinds.append(NUMERIC)
        else:
            cats = []
            cat_seen = {}
            for c in cells:
                if not _is_missing(c) and c not in cat_seen:
                    cat_seen[c] = len(cats)
                    cats.append(c)
            if not cats:
                cats = ["__absent__"]
                cat_seen = {"__absent__": 0}
            block = np.zeros((len(cells), len(cats)))
            mblock = np.zeros((len(cells), len(cats)), dtype=bool)
            for i, c in enumerate(cells):
                if _is_missing(c):
                    block[i, :] = np.nan
                    mblock[i, :] = True
                else:
                    block[i, cat_seen[c]] = 1.0
            blocks.append(block)
            mask_blocks.append(mblock)
            kinds.extend([CATEGORICAL] * len(cats))

    features = np.hstack(blocks)
    missing = np.hstack(mask_blocks)
    return Dataset(
        features=features,
        missing_mask=missing,
        labels=labels,
        feature_kinds=tuple(kinds),
        class_count=len(label_vocab),
        name=name or _stem(path),
    )


def _stem(path):
    base = str(path).replace("\\", "/").rsplit("/", 1)[-1]
    return base.rsplit(".", 1)[0] if "." in base else base


def read_manifest(path):
    """Parse a task manifest into TaskSpecs.

    Keys follow `task.<name>.path`, `task.<name>.label`,
    `task.<name>.kinds` (kinds value: `col:numeric,col:categorical`).
    Unknown keys raise ValueError.
    """
    from .kv import read_kv

    raw = read_kv(path)
    tasks = {}
    order = []
    for key, value in raw.items():
        parts = key.split(".")
        if len(parts) != 3 or parts[0] != "task":
            raise ValueError(f"{path}: unknown manifest key {key!r}")
        _, tname, attr = parts
        if tname not in tasks:
            tasks[tname] = {}
            order.append(tname)
        if attr == "path":
            tasks[tname]["path"] = value
        elif attr == "label":
            tasks[tname]["label_column"] = value
        elif attr == "kinds":
            kinds = {}
            for item in value.split(","):
                col, _, kind = item.strip().partition(":")
                if kind not in (NUMERIC, CATEGORICAL):
                    raise ValueError(f"{path}: bad kind spec {item!r} for task {tname!r}")
                kinds[col.strip()] = kind
            tasks[tname]["kinds"] = kinds
        else:
            raise ValueError(f"{path}: unknown manifest key {key!r}")
    specs = []
    for tname in order:
        attrs = tasks[tname]
        if "path" not in attrs:
            raise ValueError(f"{path}: task {tname!r} has no path")
        specs.append(TaskSpec(name=tname, **attrs))
    if not specs:
        raise ValueError(f"{path}: manifest lists no tasks")
    return specs


def load_task(spec):
    """Load the Dataset a TaskSpec points at."""
    return load_table(spec.path, schema=spec.kinds, label_column=spec.label_column, name=spec.name)


# ---------------------------------------------------------------------------
# imputation
# ---------------------------------------------------------------------------

class MeanImputer:
    """Column-mean imputation with train-time statistics.

    Fit on training rows, then apply to any rows (held-out folds reuse
    the training means).  A column with no observed values imputes to
    0.0 and emits a warning instead of aborting a batch run.
    """

    def __init__(self):
        self.means_ = None

    def fit(self, features, missing_mask):
        observed = (~missing_mask).sum(axis=0)
        sums = np.where(missing_mask, 0.0, features).sum(axis=0)
        with np.errstate(invalid="ignore"):
            means = np.where(observed > 0, sums / np.maximum(observed, 1), 0.0)
        if (observed == 0).any():
            cols = np.nonzero(observed == 0)[0].tolist()
            warnings.warn(f"columns {cols} have no observed values; imputing 0.0")
        self.means_ = means
        return self

    def transform(self, features, missing_mask):
        if self.means_ is None:
            raise ValueError("imputer not fitted")
        if features.shape[1] != self.means_.shape[0]:
            raise ValueError("column count does not match fitted imputer")
        return np.where(missing_mask, self.means_[None, :], features)


def impute_mean(ds):
    """Replace every missing cell with its column mean over observed cells."""
    imputer = MeanImputer().fit(ds.features, ds.missing_mask)
    filled = imputer.transform(ds.features, ds.missing_mask)
    return Dataset(
        features=filled,
        missing_mask=np.zeros_like(ds.missing_mask),
        labels=ds.labels,
        feature_kinds=ds.feature_kinds,
        class_count=ds.class_count,
        name=ds.name,
    )


# ---------------------------------------------------------------------------
# PCA
# ---------------------------------------------------------------------------

def _fix_signs(components):
    # deterministic orientation: largest-magnitude coefficient positive
    out = components.copy()
    for i in range(out.shape[0]):
        j = int(np.argmax(np.abs(out[i])))
        if out[i, j] < 0:
            out[i] = -out[i]
    return out


def fit_pca(data, k=None):
    """Top-k principal axes of the sample covariance (rows orthonormal).

    `data` is a Dataset without missing values or a plain (n, d) matrix.
    k defaults to d, i.e. PCA acts as a pure rotation.  Uses SVD of the
    centered matrix when n >= d, otherwise an eigendecomposition of the
    explicit covariance; either way explained_variance is nonincreasing.
    """
    if isinstance(data, Dataset):
        if data.missing_mask.any():
            raise ValueError("PCA requires a dataset without missing values")
        X = data.features
    else:
        X = np.asarray(data, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    if k is None:
        k = d
    if k < 1 or k > d:
        raise ValueError(f"component count {k} outside [1, {d}]")

    mean = X.mean(axis=0)
    centered = X - mean
    if n >= d:
        _, svals, vt = np.linalg.svd(centered, full_matrices=False)
        components = vt[:k]
        variance = (svals[:k] ** 2) / (n - 1)
    else:
        cov = centered.T @ centered / (n - 1)
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1][:k]
        components = evecs[:, order].T
        variance = np.maximum(evals[order], 0.0)
    return PcaModel(mean=mean, components=_fix_signs(components), explained_variance=variance)


def transform_pca(model, X):
    """Project rows onto the model's axes: row -> components @ (row - mean)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.mean.shape[0]:
        raise ValueError(
            f"matrix has {X.shape[1]} columns, model expects {model.mean.shape[0]}"
        )
    return (X - model.mean) @ model.components.T


# ---------------------------------------------------------------------------
# folds
# ---------------------------------------------------------------------------

def stratified_kfold(labels, k, seed):
    """Deterministic stratified folds: per-class counts differ by <= 1.

    Samples of each class are shuffled (seeded) and dealt onto folds
    with a rolling pointer, so overall fold sizes also differ by at
    most one and no fold is empty while k <= n.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if k < 2:
        raise ValueError("fold count must be at least 2")
    if k > n:
        raise ValueError(f"cannot split {n} samples into {k} folds")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    pointer = 0
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        rng.shuffle(idx)
        for i in idx:
            fold_of[i] = pointer % k
            pointer += 1
    return FoldPlan(fold_of=fold_of, k=k)
