"""Distill random-forest teachers into compact neural students on tabular tasks.

The pieces compose left to right: load and preprocess a task (data),
fit a forest teacher (forest), train soft-label students from the grid
(mlp, distill), optionally densify tiny training sets (augment), then
shrink the grid to a portfolio (portfolio) or pick one config per task
from metafeatures (metaselect).  `forestdistill` on the command line
drives the full protocol; see cli.
"""

from ._kernels import ACTIVE_BACKEND
from .augment import (
    GmmModel,
    KdeModel,
    SAMPLER_NAMES,
    UniformModel,
    augment_training_set,
    fit_gmm,
    fit_kde,
    fit_sampler,
    fit_uniform,
)
from .data import (
    Dataset,
    FoldPlan,
    MeanImputer,
    PcaModel,
    TaskSpec,
    fit_pca,
    impute_mean,
    load_table,
    load_task,
    read_manifest,
    stratified_kfold,
    transform_pca,
)
from .distill import (
    RunRecord,
    SoftLabelSet,
    TaskResult,
    accuracy_histogram,
    enumerate_grid,
    generate_soft_labels,
    read_records,
    run_augment_comparison,
    run_single_fold,
    run_task,
    write_records,
)
from .forest import Forest, ForestParams, fit_forest, predict, predict_proba
from .metaselect import (
    METAFEATURE_NAMES,
    SelectorReport,
    best_config_targets,
    evaluate_selector,
    extract_metafeatures,
    train_selector,
)
from .mlp import (
    Mlp,
    StudentConfig,
    TrainingDivergedError,
    parse_config_id,
    train_student,
)
from .portfolio import (
    PerformanceMatrix,
    PortfolioTrace,
    best_subset_score,
    greedy_reduce,
    oracle_gap,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_BACKEND",
    "Dataset",
    "FoldPlan",
    "Forest",
    "ForestParams",
    "GmmModel",
    "KdeModel",
    "METAFEATURE_NAMES",
    "MeanImputer",
    "Mlp",
    "PcaModel",
    "PerformanceMatrix",
    "PortfolioTrace",
    "RunRecord",
    "SAMPLER_NAMES",
    "SelectorReport",
    "SoftLabelSet",
    "StudentConfig",
    "TaskResult",
    "TaskSpec",
    "TrainingDivergedError",
    "UniformModel",
    "accuracy_histogram",
    "augment_training_set",
    "best_config_targets",
    "best_subset_score",
    "enumerate_grid",
    "evaluate_selector",
    "extract_metafeatures",
    "fit_forest",
    "fit_gmm",
    "fit_kde",
    "fit_pca",
    "fit_sampler",
    "fit_uniform",
    "generate_soft_labels",
    "greedy_reduce",
    "impute_mean",
    "load_table",
    "load_task",
    "oracle_gap",
    "parse_config_id",
    "predict",
    "predict_proba",
    "read_manifest",
    "read_records",
    "run_augment_comparison",
    "run_single_fold",
    "run_task",
    "stratified_kfold",
    "train_selector",
    "train_student",
    "transform_pca",
    "write_records",
]
