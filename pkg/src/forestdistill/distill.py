"""Knowledge-transfer protocol: forest teachers feeding soft labels to students.

For each cross-validation fold of a task, a fresh preprocessing chain
(mean imputation, PCA rotation) and a fresh forest teacher are fit on
the training split only.  Every student configuration in the grid is
then trained against the teacher's posteriors on the training split and
scored against ground truth on the held-out fold.  One record per
(task, fold, config) persists the outcome, so interrupted grids resume
without recomputing finished work.
"""

import itertools
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .augment import augment_training_set, fit_sampler
from .data import MeanImputer, fit_pca, transform_pca
from .forest import ForestParams, fit_forest, predict, predict_proba
from .mlp import (
    ACTIVATION_CHOICES,
    BOTTLENECK_CHOICES,
    LAYER_CHOICES,
    LR_CHOICES,
    NODE_CHOICES,
    StudentConfig,
    TrainingDivergedError,
    train_student,
)
from .seeding import ROLE_AUGMENT, ROLE_STUDENT, ROLE_TEACHER, seed_int

TEACHER_ID = "rf-teacher"
ROLE_TEACHER_NAME = "teacher"
ROLE_STUDENT_NAME = "student"


def enumerate_grid():
    """The full student grid in (layers, nodes, ratio, activation, lr) order."""
    return tuple(
        StudentConfig(layers, nodes, ratio, act, lr)
        for layers, nodes, ratio, act, lr in itertools.product(
            LAYER_CHOICES, NODE_CHOICES, BOTTLENECK_CHOICES,
            ACTIVATION_CHOICES, LR_CHOICES,
        )
    )


@dataclass(frozen=True)
class SoftLabelSet:
    """Teacher posteriors for a training split."""

    posteriors: np.ndarray
    source: str

    def __post_init__(self):
        if not np.allclose(self.posteriors.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("posterior rows must sum to 1")


def generate_soft_labels(teacher, X):
    """Teacher posteriors packaged as a transfer set."""
    return SoftLabelSet(posteriors=predict_proba(teacher, X), source=TEACHER_ID)


# ---------------------------------------------------------------------------
# results records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunRecord:
    """One scored work unit: a teacher or student on one fold of one task."""

    task: str
    fold: int
    config_id: str
    role: str
    accuracy: float
    wall_time: float = 0.0

    def to_line(self):
        payload = {
            "accuracy": self.accuracy,
            "config_id": self.config_id,
            "fold": self.fold,
            "role": self.role,
            "task": self.task,
            "wall_time": self.wall_time,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_line(cls, line):
        try:
            payload = json.loads(line)
            return cls(
                task=payload["task"],
                fold=int(payload["fold"]),
                config_id=payload["config_id"],
                role=payload["role"],
                accuracy=float(payload["accuracy"]),
                wall_time=float(payload.get("wall_time", 0.0)),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"malformed results record {line!r}: {exc}") from exc


def write_records(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_line() + "\n")


def read_records(path):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(RunRecord.from_line(line))
    return records


# ---------------------------------------------------------------------------
# per-fold pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldModels:
    """Preprocessing and teacher fit on one training split."""

    imputer: MeanImputer
    pca: object
    teacher: object

    def prep(self, ds, indices):
        """Apply the training-split preprocessing to the given rows."""
        filled = self.imputer.transform(
            ds.features[indices], ds.missing_mask[indices]
        )
        return transform_pca(self.pca, filled)


def fit_fold_models(ds, train_idx, teacher_params, teacher_seed, pca_components=None):
    """Fit imputation, rotation, and the teacher on training rows only."""
    train_idx = np.asarray(train_idx)
    imputer = MeanImputer().fit(
        ds.features[train_idx], ds.missing_mask[train_idx]
    )
    filled = imputer.transform(ds.features[train_idx], ds.missing_mask[train_idx])
    pca = fit_pca(filled, k=pca_components)
    Z = transform_pca(pca, filled)
    teacher = fit_forest(
        Z, ds.labels[train_idx], n_classes=ds.class_count,
        params=teacher_params, seed=teacher_seed,
    )
    return FoldModels(imputer=imputer, pca=pca, teacher=teacher)


# ---------------------------------------------------------------------------
# task runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaskResult:
    """All fold-level accuracies for one task."""

    task: str
    config_ids: tuple
    teacher_fold_accuracies: np.ndarray
    student_fold_accuracies: np.ndarray  # (n_configs, k)
    teacher_wall_times: np.ndarray = field(repr=False, default=None)
    student_wall_times: np.ndarray = field(repr=False, default=None)

    @property
    def fold_count(self):
        return self.teacher_fold_accuracies.shape[0]

    @property
    def teacher_mean(self):
        return float(self.teacher_fold_accuracies.mean())

    @property
    def student_means(self):
        return self.student_fold_accuracies.mean(axis=1)

    @property
    def best_student_mean(self):
        return float(self.student_means.max())

    @property
    def best_config_id(self):
        means = self.student_means
        best = means.max()
        tied = [cid for cid, m in zip(self.config_ids, means) if m == best]
        return min(tied)  # deterministic: lexicographically lowest id wins ties

    def records(self):
        """Canonical record list: fold-major, teacher first, grid order."""
        k = self.fold_count
        tw = self.teacher_wall_times
        sw = self.student_wall_times
        out = []
        for f in range(k):
            out.append(RunRecord(
                task=self.task, fold=f, config_id=TEACHER_ID,
                role=ROLE_TEACHER_NAME,
                accuracy=float(self.teacher_fold_accuracies[f]),
                wall_time=0.0 if tw is None else float(tw[f]),
            ))
            for c, cid in enumerate(self.config_ids):
                out.append(RunRecord(
                    task=self.task, fold=f, config_id=cid,
                    role=ROLE_STUDENT_NAME,
                    accuracy=float(self.student_fold_accuracies[c, f]),
                    wall_time=0.0 if sw is None else float(sw[c, f]),
                ))
        return out


def run_single_fold(ds, teacher_params, configs, folds, fold, seed, *,
                    pca_components=None, hard_labels=False, max_epochs=200,
                    batch_size=None, timings=False, existing=None, on_record=None):
    """Score one fold's teacher and students; the parallel work unit.

    Returns the freshly computed RunRecords only: units already present
    in `existing` (keyed (fold, role, config_id)) are skipped, and the
    teacher refits only when at least one student still needs its soft
    labels.
    """
    existing = existing or {}
    params = teacher_params or ForestParams()
    ids = [c.config_id for c in configs]
    t_key = (fold, ROLE_TEACHER_NAME, TEACHER_ID)
    s_keys = [(fold, ROLE_STUDENT_NAME, cid) for cid in ids]
    if t_key in existing and all(key in existing for key in s_keys):
        return []

    fresh = []

    def emit(record):
        fresh.append(record)
        if on_record is not None:
            on_record(record)

    train_idx = folds.train_indices(fold)
    test_idx = folds.test_indices(fold)
    started = time.perf_counter() if timings else 0.0
    models = fit_fold_models(
        ds, train_idx, params,
        teacher_seed=seed_int(seed, ds.name, fold, ROLE_TEACHER),
        pca_components=pca_components,
    )
    Ztr = models.prep(ds, train_idx)
    Zte = models.prep(ds, test_idx)
    y_te = ds.labels[test_idx]

    if t_key not in existing:
        teacher_acc = float((predict(models.teacher, Zte) == y_te).mean())
        wall = time.perf_counter() - started if timings else 0.0
        emit(RunRecord(
            task=ds.name, fold=fold, config_id=TEACHER_ID,
            role=ROLE_TEACHER_NAME, accuracy=teacher_acc, wall_time=float(wall),
        ))

    if hard_labels:
        hard = predict(models.teacher, Ztr)
        targets = np.zeros((hard.shape[0], ds.class_count))
        targets[np.arange(hard.shape[0]), hard] = 1.0
    else:
        targets = generate_soft_labels(models.teacher, Ztr).posteriors

    for config, key in zip(configs, s_keys):
        if key in existing:
            continue
        started = time.perf_counter() if timings else 0.0
        try:
            result = train_student(
                Ztr, targets, config,
                seed=seed_int(seed, ds.name, fold, ROLE_STUDENT, config.config_id),
                n_classes=ds.class_count, max_epochs=max_epochs,
                batch_size=batch_size,
            )
            acc = float((result.model.predict(Zte) == y_te).mean())
        except TrainingDivergedError:
            acc = 0.0  # diverged runs score zero
        wall = time.perf_counter() - started if timings else 0.0
        emit(RunRecord(
            task=ds.name, fold=fold, config_id=config.config_id,
            role=ROLE_STUDENT_NAME, accuracy=acc, wall_time=float(wall),
        ))
    return fresh


def run_task(ds, teacher_params, configs, folds, seed, *, pca_components=None,
             hard_labels=False, max_epochs=200, batch_size=None, timings=False,
             existing=None, on_record=None):
    """Run the transfer protocol for one task across all folds.

    For every fold, preprocessing and the teacher are fit on the
    training split, students are trained on the teacher's posteriors
    (or one-hot hard predictions when hard_labels is set), and everyone
    is scored on the held-out fold against ground truth.  A student
    whose training diverges scores 0.  `existing` maps
    (fold, role, config_id) to already-recorded accuracies and skips
    those work units; `on_record` is called with each freshly computed
    RunRecord.  Wall times are recorded only when timings is set, so
    result files stay byte-identical across reruns.
    """
    if not configs:
        raise ValueError("need at least one student configuration")
    ids = [c.config_id for c in configs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate student configurations")
    existing = existing or {}

    accuracies = dict(existing)
    wall_times = {}
    for fold in range(folds.k):
        for rec in run_single_fold(
            ds, teacher_params, configs, folds, fold, seed,
            pca_components=pca_components, hard_labels=hard_labels,
            max_epochs=max_epochs, batch_size=batch_size, timings=timings,
            existing=existing, on_record=on_record,
        ):
            accuracies[(rec.fold, rec.role, rec.config_id)] = rec.accuracy
            wall_times[(rec.fold, rec.role, rec.config_id)] = rec.wall_time

    k = folds.k
    teacher_acc = np.zeros(k)
    student_acc = np.zeros((len(configs), k))
    teacher_wt = np.zeros(k)
    student_wt = np.zeros((len(configs), k))
    for fold in range(k):
        t_key = (fold, ROLE_TEACHER_NAME, TEACHER_ID)
        teacher_acc[fold] = accuracies[t_key]
        teacher_wt[fold] = wall_times.get(t_key, 0.0)
        for c, cid in enumerate(ids):
            s_key = (fold, ROLE_STUDENT_NAME, cid)
            student_acc[c, fold] = accuracies[s_key]
            student_wt[c, fold] = wall_times.get(s_key, 0.0)

    return TaskResult(
        task=ds.name,
        config_ids=tuple(ids),
        teacher_fold_accuracies=teacher_acc,
        student_fold_accuracies=student_acc,
        teacher_wall_times=teacher_wt,
        student_wall_times=student_wt,
    )


def task_result_from_records(task, records, config_ids, k):
    """Reassemble one task's TaskResult from stored run records."""
    teacher_acc = np.full(k, np.nan)
    student_acc = np.full((len(config_ids), k), np.nan)
    teacher_wt = np.zeros(k)
    student_wt = np.zeros((len(config_ids), k))
    col = {cid: i for i, cid in enumerate(config_ids)}
    for rec in records:
        if rec.task != task:
            continue
        if not 0 <= rec.fold < k:
            raise ValueError(f"record for task {task!r} has fold {rec.fold}, expected 0..{k - 1}")
        if rec.role == ROLE_TEACHER_NAME:
            teacher_acc[rec.fold] = rec.accuracy
            teacher_wt[rec.fold] = rec.wall_time
        elif rec.config_id in col:
            student_acc[col[rec.config_id], rec.fold] = rec.accuracy
            student_wt[col[rec.config_id], rec.fold] = rec.wall_time
    if np.isnan(teacher_acc).any() or np.isnan(student_acc).any():
        raise ValueError(f"records for task {task!r} are incomplete")
    return TaskResult(
        task=task,
        config_ids=tuple(config_ids),
        teacher_fold_accuracies=teacher_acc,
        student_fold_accuracies=student_acc,
        teacher_wall_times=teacher_wt,
        student_wall_times=student_wt,
    )


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HistogramReport:
    """Best-student-minus-teacher differences, binned, with summary stats."""

    bin_edges: np.ndarray
    counts: np.ndarray
    diffs: np.ndarray
    mean: float
    median: float
    fraction_nonnegative: float

    def rows(self):
        """(bin_lo, bin_hi, count) rows for a delimiter-separated table."""
        return [
            (float(self.bin_edges[i]), float(self.bin_edges[i + 1]), int(self.counts[i]))
            for i in range(self.counts.shape[0])
        ]


def accuracy_histogram(results, bins=20):
    """Distribution of per-task (best student − teacher) accuracy gaps."""
    if not results:
        raise ValueError("no task results to summarize")
    if bins < 1:
        raise ValueError("bin count must be positive")
    diffs = np.array([r.best_student_mean - r.teacher_mean for r in results])
    lo = min(float(diffs.min()), 0.0)
    hi = max(float(diffs.max()), 0.0)
    if lo == hi:
        lo -= 0.01
        hi += 0.01
    counts, edges = np.histogram(diffs, bins=bins, range=(lo, hi))
    return HistogramReport(
        bin_edges=edges,
        counts=counts,
        diffs=diffs,
        mean=float(diffs.mean()),
        median=float(np.median(diffs)),
        fraction_nonnegative=float((diffs >= 0.0).mean()),
    )


# ---------------------------------------------------------------------------
# augmentation comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AugmentComparison:
    """Teacher agreement of a base student vs an augmented one."""

    sampler: str
    extra_points: int
    base_agreement: float
    augmented_agreement: float


def run_augment_comparison(Ztr, teacher, config, sampler_name, m, seed, Zev, *,
                           max_epochs=200, batch_size=None, gmm_components=5):
    """Train the same student with and without density-sampled extra points.

    Both students share the training seed; the augmented one sees m
    additional inputs drawn from a density fitted to Ztr and labeled by
    the teacher.  Agreement is the fraction of Zev rows where student
    and teacher predict the same class.
    """
    Ztr = np.asarray(Ztr, dtype=np.float64)
    Zev = np.asarray(Zev, dtype=np.float64)
    targets = generate_soft_labels(teacher, Ztr).posteriors
    teacher_pred = predict(teacher, Zev)
    student_seed = seed_int(seed, ROLE_STUDENT, config.config_id)

    def agreement(train_X, train_T):
        try:
            result = train_student(
                train_X, train_T, config, seed=student_seed,
                max_epochs=max_epochs, batch_size=batch_size,
            )
        except TrainingDivergedError:
            return 0.0
        return float((result.model.predict(Zev) == teacher_pred).mean())

    base = agreement(Ztr, targets)
    sampler = fit_sampler(
        sampler_name, Ztr, seed=seed_int(seed, ROLE_AUGMENT, sampler_name),
        gmm_components=gmm_components,
    )
    X2, T2 = augment_training_set(
        sampler, teacher, Ztr, targets, m,
        seed=seed_int(seed, ROLE_AUGMENT, sampler_name, 1),
    )
    augmented = agreement(X2, T2)
    return AugmentComparison(
        sampler=sampler_name, extra_points=m,
        base_agreement=base, augmented_agreement=augmented,
    )
