"""Backward elimination of the student grid into small candidate portfolios.

A portfolio's value is the mean over tasks of the best accuracy any of
its configs reaches on that task.  Greedy backward elimination removes,
at every step, the config whose removal costs the least of that value,
re-evaluating contributions each step.  The resulting trace quantifies
how small the grid can get before per-task bests degrade.
"""

from dataclasses import dataclass

import numpy as np

from .distill import ROLE_STUDENT_NAME


@dataclass(frozen=True)
class PerformanceMatrix:
    """Per-task mean accuracy of every config: tasks are rows, configs columns."""

    values: np.ndarray
    task_names: tuple
    config_ids: tuple

    def __post_init__(self):
        T, S = self.values.shape
        if len(self.task_names) != T or len(self.config_ids) != S:
            raise ValueError("matrix shape does not match task/config names")
        if len(set(self.task_names)) != T:
            raise ValueError("duplicate task names")
        if len(set(self.config_ids)) != S:
            raise ValueError("duplicate config ids")
        if not np.isfinite(self.values).all():
            raise ValueError("matrix entries must be finite")
        if self.values.min() < 0.0 or self.values.max() > 1.0:
            raise ValueError("accuracies must lie in [0, 1]")

    @property
    def n_tasks(self):
        return self.values.shape[0]

    @property
    def n_configs(self):
        return self.values.shape[1]

    def columns_for(self, subset):
        ids = list(subset)
        if not ids:
            raise ValueError("config subset must be nonempty")
        index = {cid: i for i, cid in enumerate(self.config_ids)}
        missing = [cid for cid in ids if cid not in index]
        if missing:
            raise ValueError(f"unknown config ids {sorted(missing)}")
        return np.array([index[cid] for cid in ids], dtype=np.int64)

    @classmethod
    def from_records(cls, records):
        """Aggregate student records into per-task fold-mean accuracies.

        Every task must carry the same config set; teacher records are
        ignored here (they are not selectable).
        """
        sums = {}
        counts = {}
        tasks = []
        configs = []
        for rec in records:
            if rec.role != ROLE_STUDENT_NAME:
                continue
            key = (rec.task, rec.config_id)
            if rec.task not in sums:
                sums[rec.task] = {}
                counts[rec.task] = {}
                tasks.append(rec.task)
            if rec.config_id not in configs:
                configs.append(rec.config_id)
            sums[rec.task][rec.config_id] = sums[rec.task].get(rec.config_id, 0.0) + rec.accuracy
            counts[rec.task][rec.config_id] = counts[rec.task].get(rec.config_id, 0) + 1
        if not tasks:
            raise ValueError("no student records found")
        values = np.zeros((len(tasks), len(configs)))
        for i, task in enumerate(tasks):
            for j, cid in enumerate(configs):
                if cid not in sums[task]:
                    raise ValueError(f"task {task!r} has no records for config {cid!r}")
                values[i, j] = sums[task][cid] / counts[task][cid]
        return cls(values=values, task_names=tuple(tasks), config_ids=tuple(configs))


def best_subset_score(pm, subset):
    """Mean over tasks of the best accuracy inside the subset."""
    cols = pm.columns_for(subset)
    return float(pm.values[:, cols].max(axis=1).mean())


def oracle_gap(pm, subset):
    """How much the subset loses against the full grid; never negative."""
    return best_subset_score(pm, pm.config_ids) - best_subset_score(pm, subset)


@dataclass(frozen=True)
class PortfolioTrace:
    """Greedy elimination result: removal order and the score at every size."""

    elimination_order: tuple  # first-removed first; permutation of all ids
    sizes: np.ndarray         # S, S-1, ..., 1
    scores: np.ndarray        # best_subset_score of the survivors at each size
    gaps: np.ndarray          # full-grid score minus each survivors' score

    def subset_of_size(self, n):
        """The n configs still alive once the trace reaches size n."""
        total = len(self.elimination_order)
        if n < 1 or n > total:
            raise ValueError(f"size {n} outside [1, {total}]")
        return tuple(self.elimination_order[total - n:])


def greedy_reduce(pm):
    """Backward elimination with stepwise re-evaluation.

    At each step the config whose removal leaves the highest remaining
    score goes; exact ties remove the lexicographically greatest id.
    Scores are recorded at every size from S down to 1.
    """
    current = list(pm.config_ids)
    order = []
    sizes = []
    scores = []

    full_score = best_subset_score(pm, current)
    sizes.append(len(current))
    scores.append(full_score)

    while len(current) > 1:
        cols = pm.columns_for(current)
        vals = pm.values[:, cols]
        # per task: best and second-best among survivors (with multiplicity),
        # so a single removal's new max is O(1) per task
        part = np.partition(vals, vals.shape[1] - 2, axis=1)
        m1 = part[:, -1][:, None]
        m2 = part[:, -2][:, None]
        after = np.where(vals == m1, m2, m1)  # (T, s): new per-task max if column removed
        candidate_scores = after.mean(axis=0)

        best = candidate_scores.max()
        tied = [current[i] for i in np.nonzero(candidate_scores == best)[0]]
        victim = max(tied)
        order.append(victim)
        current.remove(victim)
        sizes.append(len(current))
        scores.append(float(best))

    order.append(current[0])
    scores = np.array(scores)
    return PortfolioTrace(
        elimination_order=tuple(order),
        sizes=np.array(sizes, dtype=np.int64),
        scores=scores,
        gaps=full_score - scores,
    )
