"""Regenerate the bundled CSV tasks from scikit-learn's dataset loaders.

Development-time utility: the package itself never imports scikit-learn.
The four classics land in data/ as plain CSVs (features, then a string
label column) with deterministic stratified subsampling where the full
table would be needlessly large for a test corpus.

Usage: python3 scripts/make_public_datasets.py [out_dir]
"""

import os
import re
import sys

import numpy as np
from sklearn import datasets


def slug(name):
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def stratified_subsample(y, per_class, seed):
    rng = np.random.default_rng(seed)
    keep = []
    for cls in np.unique(y):
        rows = np.nonzero(y == cls)[0]
        take = min(per_class, rows.size)
        keep.append(rng.choice(rows, size=take, replace=False))
    return np.sort(np.concatenate(keep))


def write_csv(path, X, y, feature_names, class_names):
    header = [slug(name) for name in feature_names] + ["label"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row, cls in zip(X, y):
            cells = [repr(float(v)) for v in row]
            cells.append(class_names[cls])
            fh.write(",".join(cells) + "\n")
    print(f"{path}: {X.shape[0]} rows, {X.shape[1]} features, "
          f"{len(class_names)} classes")


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    os.makedirs(out_dir, exist_ok=True)

    iris = datasets.load_iris()
    write_csv(os.path.join(out_dir, "iris.csv"), iris.data, iris.target,
              iris.feature_names, [str(n) for n in iris.target_names])

    wine = datasets.load_wine()
    write_csv(os.path.join(out_dir, "wine.csv"), wine.data, wine.target,
              wine.feature_names, [str(n) for n in wine.target_names])

    cancer = datasets.load_breast_cancer()
    rows = stratified_subsample(cancer.target, per_class=135, seed=20240901)
    write_csv(os.path.join(out_dir, "breast_cancer.csv"),
              cancer.data[rows], cancer.target[rows],
              cancer.feature_names, [str(n) for n in cancer.target_names])

    digits = datasets.load_digits()
    rows = stratified_subsample(digits.target, per_class=28, seed=20240902)
    write_csv(os.path.join(out_dir, "digits.csv"),
              digits.data[rows], digits.target[rows],
              [f"pixel_{i // 8}_{i % 8}" for i in range(64)],
              [f"d{c}" for c in range(10)])


if __name__ == "__main__":
    main()
