"""Command-line driver: distill grids, reduce portfolios, auto-select configs.

Every command reads a flat key-value experiment config (unknown keys are
errors) and writes delimiter-separated reports under --out.  Exit codes:
0 on success, 1 when some tasks failed but the run continued, 2 on a
configuration error.
"""

import argparse
import concurrent.futures
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .augment import SAMPLER_NAMES
from .data import load_task, read_manifest, stratified_kfold
from .distill import (
    ROLE_TEACHER_NAME,
    accuracy_histogram,
    enumerate_grid,
    fit_fold_models,
    read_records,
    run_augment_comparison,
    run_single_fold,
    task_result_from_records,
)
from .forest import ForestParams
from .kv import read_kv
from .metaselect import (
    METAFEATURE_NAMES,
    evaluate_selector,
    extract_metafeatures,
    train_selector,
)
from .mlp import StudentConfig, parse_config_id
from .model_io import load_model
from .portfolio import PerformanceMatrix, best_subset_score, greedy_reduce
from .seeding import ROLE_FOLDS, ROLE_TEACHER, seed_int, seed_parts


class ConfigError(Exception):
    """Invalid experiment configuration; maps to exit code 2."""


# every key an experiment config may contain; anything else is a typo
KNOWN_KEYS = frozenset({
    "manifest",
    "results",
    "grid",
    "folds",
    "seed",
    "timings",
    "histogram.bins",
    "teacher.n_trees",
    "teacher.max_depth",
    "teacher.min_samples_leaf",
    "teacher.max_features",
    "student.max_epochs",
    "student.batch_size",
    "student.hard_labels",
    "pca.components",
    "augment.sampler",
    "augment.samples",
    "augment.gmm_components",
    "portfolio.sizes",
    "autoselect.candidates",
    "autoselect.folds",
    "autoselect.trees",
})


@dataclass(frozen=True)
class ExperimentConfig:
    """A parsed, validated experiment config file."""

    manifest: str = None
    results: str = None
    grid: str = "full"
    folds: int = 10
    seed: int = 0
    timings: bool = False
    histogram_bins: int = 20
    teacher: ForestParams = ForestParams()
    max_epochs: int = 200
    batch_size: int = None
    hard_labels: bool = False
    pca_components: int = None
    augment_sampler: str = None
    augment_samples: int = 500
    augment_gmm_components: int = 5
    portfolio_sizes: tuple = None
    autoselect_candidates: int = 20
    autoselect_folds: int = None
    autoselect_trees: int = 100


def _parse_int(raw, key, minimum=None):
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be at least {minimum}, got {value}")
    return value


def _parse_bool(raw, key):
    lowered = raw.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {raw!r}")


def _resolve(path, base_dir):
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def load_experiment_config(path, override_seed=None):
    """Read and validate a key-value experiment config.

    Unknown keys, malformed values, and missing referenced files all
    raise ConfigError.  Relative paths are taken relative to the config
    file's directory.  An empty value means "use the default".
    """
    try:
        raw = read_kv(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
    raw = {key: value for key, value in raw.items() if value != ""}
    base_dir = os.path.dirname(os.path.abspath(path))

    cfg = ExperimentConfig()
    if "manifest" in raw:
        cfg = replace(cfg, manifest=_resolve(raw["manifest"], base_dir))
        if not os.path.isfile(cfg.manifest):
            raise ConfigError(f"manifest file not found: {cfg.manifest}")
    if "results" in raw:
        cfg = replace(cfg, results=_resolve(raw["results"], base_dir))
        if not os.path.isfile(cfg.results):
            raise ConfigError(f"results file not found: {cfg.results}")
    if "grid" in raw:
        grid = raw["grid"]
        if grid.startswith("file:"):
            grid = "file:" + _resolve(grid[len("file:"):], base_dir)
        cfg = replace(cfg, grid=grid)
    cfg = replace(
        cfg,
        folds=_parse_int(raw.get("folds", "10"), "folds", minimum=2),
        seed=_parse_int(raw.get("seed", "0"), "seed"),
        timings=_parse_bool(raw.get("timings", "false"), "timings"),
        histogram_bins=_parse_int(raw.get("histogram.bins", "20"), "histogram.bins", minimum=1),
        max_epochs=_parse_int(raw.get("student.max_epochs", "200"), "student.max_epochs", minimum=1),
        hard_labels=_parse_bool(raw.get("student.hard_labels", "false"), "student.hard_labels"),
        augment_samples=_parse_int(raw.get("augment.samples", "500"), "augment.samples", minimum=0),
        augment_gmm_components=_parse_int(
            raw.get("augment.gmm_components", "5"), "augment.gmm_components", minimum=1),
        autoselect_candidates=_parse_int(
            raw.get("autoselect.candidates", "20"), "autoselect.candidates", minimum=1),
        autoselect_trees=_parse_int(raw.get("autoselect.trees", "100"), "autoselect.trees", minimum=1),
    )
    if "student.batch_size" in raw:
        cfg = replace(cfg, batch_size=_parse_int(raw["student.batch_size"], "student.batch_size", minimum=1))
    if "pca.components" in raw:
        cfg = replace(cfg, pca_components=_parse_int(raw["pca.components"], "pca.components", minimum=1))
    if "autoselect.folds" in raw:
        cfg = replace(cfg, autoselect_folds=_parse_int(raw["autoselect.folds"], "autoselect.folds", minimum=2))
    if "augment.sampler" in raw:
        sampler = raw["augment.sampler"]
        if sampler not in SAMPLER_NAMES:
            raise ConfigError(
                f"augment.sampler: expected one of {', '.join(SAMPLER_NAMES)}, got {sampler!r}")
        cfg = replace(cfg, augment_sampler=sampler)
    if "portfolio.sizes" in raw:
        try:
            sizes = tuple(int(part) for part in raw["portfolio.sizes"].split(","))
        except ValueError:
            raise ConfigError(
                f"portfolio.sizes: expected comma-separated integers, got {raw['portfolio.sizes']!r}"
            ) from None
        cfg = replace(cfg, portfolio_sizes=sizes)

    try:
        teacher = ForestParams(
            n_trees=_parse_int(raw.get("teacher.n_trees", "100"), "teacher.n_trees", minimum=1),
            max_depth=(
                _parse_int(raw["teacher.max_depth"], "teacher.max_depth", minimum=1)
                if "teacher.max_depth" in raw else None),
            min_samples_leaf=_parse_int(
                raw.get("teacher.min_samples_leaf", "1"), "teacher.min_samples_leaf", minimum=1),
            max_features=(
                _parse_int(raw["teacher.max_features"], "teacher.max_features", minimum=1)
                if "teacher.max_features" in raw else None),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg = replace(cfg, teacher=teacher)

    if override_seed is not None:
        cfg = replace(cfg, seed=override_seed)
    return cfg


def resolve_grid(spec):
    """Turn a grid spec into student configs.

    `full` is the whole 600-point grid, `single:<config-id>` one point,
    `file:<path>` one config id per line ('#' comments allowed).
    """
    if spec == "full":
        return enumerate_grid()
    if spec.startswith("single:"):
        try:
            return (parse_config_id(spec[len("single:"):]),)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        if not os.path.isfile(path):
            raise ConfigError(f"grid file not found: {path}")
        configs = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    configs.append(parse_config_id(line))
                except ValueError as exc:
                    raise ConfigError(f"{path}: {exc}") from exc
        if not configs:
            raise ConfigError(f"grid file {path} lists no configurations")
        ids = [c.config_id for c in configs]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"grid file {path} repeats a configuration")
        return tuple(configs)
    raise ConfigError(f"grid: expected full, single:<config-id>, or file:<path>, got {spec!r}")


def load_manifest_tasks(cfg, command):
    if cfg.manifest is None:
        raise ConfigError(f"{command} requires a manifest")
    try:
        specs = read_manifest(cfg.manifest)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    base_dir = os.path.dirname(os.path.abspath(cfg.manifest))
    specs = [replace(spec, path=_resolve(spec.path, base_dir)) for spec in specs]
    for spec in specs:
        if not os.path.isfile(spec.path):
            raise ConfigError(f"dataset file not found: {spec.path}")
    return specs


def _fmt(x):
    return format(float(x), ".12g")


def _write_table(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(str(cell) for cell in row) + "\n")


def _task_folds_plan(ds, cfg):
    return stratified_kfold(ds.labels, cfg.folds, seed=seed_parts(cfg.seed, ds.name, ROLE_FOLDS))


# ---------------------------------------------------------------------------
# distill
# ---------------------------------------------------------------------------

def _fold_payload_run(payload):
    # worker-side unit: reload the task, rebuild the fold plan, score one fold
    spec, teacher, configs, fold, cfg, existing_keys = payload
    ds = load_task(spec)
    folds = _task_folds_plan(ds, cfg)
    return run_single_fold(
        ds, teacher, configs, folds, fold, cfg.seed,
        pca_components=cfg.pca_components, hard_labels=cfg.hard_labels,
        max_epochs=cfg.max_epochs, batch_size=cfg.batch_size,
        timings=cfg.timings, existing=dict.fromkeys(existing_keys, 0.0),
    )


def _record_sort_key(task_order, grid_order):
    def key(rec):
        slot = 0 if rec.role == ROLE_TEACHER_NAME else 1 + grid_order[rec.config_id]
        return (task_order[rec.task], rec.fold, slot)
    return key


def cmd_distill(args):
    cfg = load_experiment_config(args.config, override_seed=args.seed)
    specs = load_manifest_tasks(cfg, "distill")
    configs = resolve_grid(cfg.grid)
    os.makedirs(args.out, exist_ok=True)

    task_order = {spec.name: i for i, spec in enumerate(specs)}
    grid_order = {c.config_id: i for i, c in enumerate(configs)}
    config_ids = [c.config_id for c in configs]

    results_path = os.path.join(args.out, "results.jsonl")
    kept = []
    if os.path.exists(results_path):
        try:
            stored = read_records(results_path)
        except ValueError as exc:
            raise ConfigError(f"cannot resume from {results_path}: {exc}") from exc
        seen = set()
        for rec in stored:
            unit = (rec.task, rec.fold, rec.role, rec.config_id)
            if (rec.task in task_order and 0 <= rec.fold < cfg.folds
                    and (rec.role == ROLE_TEACHER_NAME or rec.config_id in grid_order)
                    and unit not in seen):
                kept.append(rec)
                seen.add(unit)
    existing = {}
    for rec in kept:
        existing.setdefault(rec.task, {})[(rec.fold, rec.role, rec.config_id)] = rec.accuracy

    workers = args.workers if args.workers > 0 else (os.cpu_count() or 1)
    fresh = []
    failed = {}
    with open(results_path, "a", encoding="utf-8") as live:

        def collect(records):
            for rec in records:
                fresh.append(rec)
                live.write(rec.to_line() + "\n")
            live.flush()

        if workers == 1:
            for spec in specs:
                task_existing = existing.get(spec.name, {})
                try:
                    ds = load_task(spec)
                    folds = _task_folds_plan(ds, cfg)
                    for fold in range(cfg.folds):
                        collect(run_single_fold(
                            ds, cfg.teacher, configs, folds, fold, cfg.seed,
                            pca_components=cfg.pca_components,
                            hard_labels=cfg.hard_labels,
                            max_epochs=cfg.max_epochs, batch_size=cfg.batch_size,
                            timings=cfg.timings, existing=task_existing,
                        ))
                except (ValueError, OSError) as exc:
                    failed[spec.name] = str(exc)
        else:
            payloads = [
                (spec, cfg.teacher, configs, fold, cfg,
                 tuple(existing.get(spec.name, {})))
                for spec in specs for fold in range(cfg.folds)
            ]
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {
                    pool.submit(_fold_payload_run, payload): payload[0].name
                    for payload in payloads
                }
                for future in concurrent.futures.as_completed(futures):
                    name = futures[future]
                    try:
                        collect(future.result())
                    except (ValueError, OSError) as exc:
                        failed.setdefault(name, str(exc))

    merged = kept + fresh
    merged.sort(key=_record_sort_key(task_order, grid_order))
    tmp_path = results_path + ".tmp"
    with open(tmp_path, "w", encoding="utf-8") as fh:
        for rec in merged:
            fh.write(rec.to_line() + "\n")
    os.replace(tmp_path, results_path)

    for name, reason in failed.items():
        print(f"task {name} failed: {reason}", file=sys.stderr)

    finished = [
        spec.name for spec in specs
        if spec.name not in failed
    ]
    results = []
    for name in finished:
        try:
            results.append(task_result_from_records(name, merged, config_ids, cfg.folds))
        except ValueError as exc:
            failed[name] = str(exc)
            print(f"task {name} failed: {exc}", file=sys.stderr)

    if results:
        _write_table(
            os.path.join(args.out, "tasks.tsv"),
            ("task", "teacher_mean", "best_student_mean", "best_config", "diff"),
            [
                (r.task, _fmt(r.teacher_mean), _fmt(r.best_student_mean),
                 r.best_config_id, _fmt(r.best_student_mean - r.teacher_mean))
                for r in results
            ],
        )
        report = accuracy_histogram(results, bins=cfg.histogram_bins)
        _write_table(
            os.path.join(args.out, "histogram.tsv"),
            ("bin_lo", "bin_hi", "count"),
            [(_fmt(lo), _fmt(hi), count) for lo, hi, count in report.rows()],
        )
        _write_table(
            os.path.join(args.out, "summary.tsv"),
            ("metric", "value"),
            [
                ("tasks", len(results)),
                ("mean_diff", _fmt(report.mean)),
                ("median_diff", _fmt(report.median)),
                ("fraction_nonnegative", _fmt(report.fraction_nonnegative)),
            ],
        )
        print(f"{len(merged)} records ({len(fresh)} computed, {len(kept)} reused) -> {results_path}")
        print(f"median best-student-minus-teacher difference: {_fmt(report.median)}")
    else:
        print("no tasks finished; results file holds partial records", file=sys.stderr)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# portfolio
# ---------------------------------------------------------------------------

def _load_matrix(cfg, command):
    if cfg.results is None:
        raise ConfigError(f"{command} requires a results file")
    try:
        records = read_records(cfg.results)
        return PerformanceMatrix.from_records(records)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_portfolio(args):
    cfg = load_experiment_config(args.config, override_seed=args.seed)
    pm = _load_matrix(cfg, "portfolio")
    trace = greedy_reduce(pm)
    os.makedirs(args.out, exist_ok=True)

    sizes = cfg.portfolio_sizes or tuple(int(s) for s in trace.sizes)
    available = {int(s): i for i, s in enumerate(trace.sizes)}
    rows = []
    for size in sizes:
        if size not in available:
            raise ConfigError(f"portfolio.sizes: no subset of size {size} (grid has {pm.n_configs})")
        i = available[size]
        rows.append((size, _fmt(trace.scores[i]), _fmt(trace.gaps[i])))
    _write_table(os.path.join(args.out, "portfolio.tsv"), ("size", "score", "gap"), rows)
    with open(os.path.join(args.out, "elimination.txt"), "w", encoding="utf-8") as fh:
        for cid in trace.elimination_order:
            fh.write(cid + "\n")

    print(f"full grid of {pm.n_configs} scores {_fmt(trace.scores[0])} over {pm.n_tasks} tasks")
    print(f"elimination order and per-size scores -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# autoselect
# ---------------------------------------------------------------------------

def cmd_autoselect(args):
    cfg = load_experiment_config(args.config, override_seed=args.seed)
    pm = _load_matrix(cfg, "autoselect")
    specs = load_manifest_tasks(cfg, "autoselect")
    by_name = {spec.name: spec for spec in specs}
    missing = [name for name in pm.task_names if name not in by_name]
    if missing:
        raise ConfigError(f"manifest lacks tasks present in results: {', '.join(missing)}")

    k = cfg.autoselect_folds or min(10, pm.n_tasks // 2)
    if k < 2:
        raise ConfigError(f"autoselect needs at least 4 tasks, results hold {pm.n_tasks}")
    os.makedirs(args.out, exist_ok=True)

    features = np.empty((pm.n_tasks, len(METAFEATURE_NAMES)))
    for t, name in enumerate(pm.task_names):
        features[t] = extract_metafeatures(load_task(by_name[name]))
    _write_table(
        os.path.join(args.out, "metafeatures.tsv"),
        ("task",) + METAFEATURE_NAMES,
        [
            (pm.task_names[t],) + tuple(_fmt(v) for v in features[t])
            for t in range(pm.n_tasks)
        ],
    )

    n_candidates = min(cfg.autoselect_candidates, pm.n_configs)
    candidates = greedy_reduce(pm).subset_of_size(n_candidates)
    try:
        run = train_selector(
            features, pm, candidates, k=k, seed=cfg.seed,
            selector_params=ForestParams(n_trees=cfg.autoselect_trees),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = evaluate_selector(run, pm)

    index = {cid: j for j, cid in enumerate(pm.config_ids)}
    _write_table(
        os.path.join(args.out, "selections.tsv"),
        ("task", "selected", "best_candidate", "selected_score"),
        [
            (pm.task_names[t], run.predictions[t], run.targets[t],
             _fmt(pm.values[t, index[run.predictions[t]]]))
            for t in range(pm.n_tasks)
        ],
    )
    _write_table(
        os.path.join(args.out, "selector_report.tsv"),
        ("metric", "value"),
        [
            ("candidates", len(candidates)),
            ("selector_score", _fmt(report.selected_score)),
            ("candidate_oracle_score", _fmt(report.subset_score)),
            ("full_grid_score", _fmt(best_subset_score(pm, pm.config_ids))),
            ("selection_accuracy", _fmt(report.selection_accuracy)),
        ],
    )
    bound = "<=" if report.selected_score <= report.subset_score else "EXCEEDS"
    print(f"selector {_fmt(report.selected_score)} {bound} candidate oracle "
          f"{_fmt(report.subset_score)} with {len(candidates)} candidates over {pm.n_tasks} tasks")
    print(f"selections and metafeature cache -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# augment-eval
# ---------------------------------------------------------------------------

def cmd_augment_eval(args):
    cfg = load_experiment_config(args.config, override_seed=args.seed)
    if not cfg.grid.startswith("single:"):
        raise ConfigError("augment-eval requires grid = single:<config-id>")
    config = resolve_grid(cfg.grid)[0]
    if cfg.augment_sampler is None:
        raise ConfigError("augment-eval requires augment.sampler")
    specs = load_manifest_tasks(cfg, "augment-eval")
    os.makedirs(args.out, exist_ok=True)

    rows = []
    failed = {}
    task_means = []
    for spec in specs:
        try:
            ds = load_task(spec)
            folds = _task_folds_plan(ds, cfg)
            base, augmented = [], []
            for fold in range(cfg.folds):
                train_idx = folds.train_indices(fold)
                models = fit_fold_models(
                    ds, train_idx, cfg.teacher,
                    teacher_seed=seed_int(cfg.seed, ds.name, fold, ROLE_TEACHER),
                    pca_components=cfg.pca_components,
                )
                comparison = run_augment_comparison(
                    models.prep(ds, train_idx), models.teacher, config,
                    cfg.augment_sampler, cfg.augment_samples,
                    seed_int(cfg.seed, ds.name, fold),
                    models.prep(ds, folds.test_indices(fold)),
                    max_epochs=cfg.max_epochs, batch_size=cfg.batch_size,
                    gmm_components=cfg.augment_gmm_components,
                )
                base.append(comparison.base_agreement)
                augmented.append(comparison.augmented_agreement)
                rows.append((
                    ds.name, fold, _fmt(comparison.base_agreement),
                    _fmt(comparison.augmented_agreement),
                    _fmt(comparison.augmented_agreement - comparison.base_agreement),
                ))
            task_means.append((ds.name, float(np.mean(base)), float(np.mean(augmented))))
        except (ValueError, OSError) as exc:
            failed[spec.name] = str(exc)
            print(f"task {spec.name} failed: {exc}", file=sys.stderr)

    _write_table(
        os.path.join(args.out, "augment.tsv"),
        ("task", "fold", "base_agreement", "augmented_agreement", "delta"),
        rows,
    )
    for name, base_mean, aug_mean in task_means:
        print(f"{name}: teacher agreement {_fmt(base_mean)} base, {_fmt(aug_mean)} "
              f"with {cfg.augment_samples} {cfg.augment_sampler} samples "
              f"({config.config_id})")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# inspect
# ---------------------------------------------------------------------------

def cmd_inspect(args):
    try:
        kind, meta, arrays = load_model(args.model)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"kind: {kind}")
    if kind == "forest":
        offsets = arrays["offsets"]
        print(f"trees: {offsets.shape[0] - 1}")
        print(f"nodes: {int(offsets[-1])}")
        print(f"features in: {meta['n_features_in']}")
        print(f"classes: {meta['n_classes']}")
        print("params: " + " ".join(
            f"{key}={meta[key]}"
            for key in ("n_trees", "max_depth", "min_samples_leaf", "max_features")
        ))
        print(f"seed: {meta['seed']}")
    elif kind == "mlp":
        config = StudentConfig(
            meta["layers"], meta["nodes"], meta["bottleneck"],
            meta["activation"], meta["lr"],
        )
        widths = [int(arrays["W0"].shape[0])]
        i = 0
        while f"W{i}" in arrays:
            widths.append(int(arrays[f"W{i}"].shape[1]))
            i += 1
        n_params = sum(arrays[name].size for name in arrays if name[0] in "Wb")
        print(f"config: {config.config_id}")
        print("architecture: " + " -> ".join(str(w) for w in widths))
        print(f"activation: {meta['activation']}")
        print(f"standardized inputs: {'yes' if meta['standardized'] else 'no'}")
        print(f"parameters: {n_params}")
    else:
        for name in sorted(arrays):
            print(f"array {name}: shape {arrays[name].shape} dtype {arrays[name].dtype}")
    return 0


# ---------------------------------------------------------------------------
# entry
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="forestdistill",
        description="Distill forest teachers into compact student networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="experiment config (key = value lines)")
        p.add_argument("--out", required=True, help="directory for reports and result files")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel fold workers for distill (0 = all cores)")

    p = sub.add_parser("distill", help="run the teacher/student transfer grid")
    add_common(p)
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("portfolio", help="greedy-reduce a results file to small config subsets")
    add_common(p)
    p.set_defaults(func=cmd_portfolio)

    p = sub.add_parser("autoselect", help="cross-validate a metafeature-based config selector")
    add_common(p)
    p.set_defaults(func=cmd_autoselect)

    p = sub.add_parser("augment-eval", help="compare a student with and without sampled extra points")
    add_common(p)
    p.set_defaults(func=cmd_augment_eval)

    p = sub.add_parser("inspect", help="print a saved model's summary")
    p.add_argument("model", help="path to a saved forest or student")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
