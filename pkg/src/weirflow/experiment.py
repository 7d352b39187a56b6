"""Cross-validated comparison of the classical, deep and hybrid models.

Every model is refit on each fold's training split (features standardized on
that split only) and predicts the held-out fold; the per-sample predictions
are pooled into one out-of-fold vector per model.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import classical_models, deep_models
from .data_model import Dataset, ScalerParams, generate_synthetic, load_csv, standardize
from .errors import ArgumentError, ConvergenceError, TrainingError, WeirflowError
from .metrics import KINDS, MetricReport, compute_report, log_report
from .nn import TrainConfig, predict, train
from .resampling import FoldPlan, make_folds

log = logging.getLogger(__name__)

CLASSICAL = classical_models.NAMES
DEEP = deep_models.NAMES
HYBRID = "lr-cgru"
ALL_MODELS = CLASSICAL + DEEP + (HYBRID,)
STRATEGIES = ("average", "stacking")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    folds: int = 5
    models: tuple[str, ...] = ALL_MODELS
    hybrid_strategy: str = "average"
    epochs: int = 200
    data: str | None = None
    synthetic: Mapping | None = None
    out: str = "results"
    in_sample: bool = False
    single_thread: bool = True

    def __post_init__(self):
        models = self.models
        if isinstance(models, str):
            models = [m for m in models.split(",") if m]
        models = tuple(m.strip().lower() for m in models)
        unknown = [m for m in models if m not in ALL_MODELS]
        if unknown:
            raise ArgumentError(f"unknown model {unknown[0]!r}; expected some of {', '.join(ALL_MODELS)}")
        if not models:
            raise ArgumentError("models must be non-empty")
        # canonical order, duplicates dropped
        object.__setattr__(self, "models", tuple(m for m in ALL_MODELS if m in models))
        if self.folds < 2:
            raise ArgumentError(f"folds must be >= 2, got {self.folds}")
        if self.epochs < 1:
            raise ArgumentError(f"epochs must be >= 1, got {self.epochs}")
        if self.hybrid_strategy not in STRATEGIES:
            raise ArgumentError(f"hybrid_strategy must be one of {', '.join(STRATEGIES)}")
        if self.data is not None and self.synthetic is not None:
            raise ArgumentError("give either data or synthetic, not both")
        if self.synthetic is not None:
            bad = set(self.synthetic) - {"n", "mode", "noise_sd", "seed"}
            if bad:
                raise ArgumentError(f"unknown synthetic key {sorted(bad)[0]!r}")

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ArgumentError(f"unknown config key {unknown[0]!r}")
        return cls(**mapping)

    @staticmethod
    def read_mapping(path: str | Path) -> dict:
        """Raw settings of a JSON config file, checked for unknown keys."""
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ArgumentError(f"{path}: config must be a JSON object")
        ExperimentConfig.from_mapping(doc)
        return doc

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_mapping(cls.read_mapping(path))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["models"] = list(self.models)
        out["synthetic"] = dict(self.synthetic) if self.synthetic is not None else None
        return out

    def load_dataset(self) -> Dataset:
        if self.data is not None:
            return load_csv(self.data)
        params = dict(self.synthetic or {})
        return generate_synthetic(
            int(params.get("n", 120)),
            params.get("mode", "bagheri"),
            float(params.get("noise_sd", 0.01)),
            int(params.get("seed", self.seed)),
        )


@dataclass
class RunResult:
    config: ExperimentConfig
    plan: FoldPlan
    y_true: np.ndarray
    models: tuple[str, ...]
    oof: dict[str, np.ndarray] = field(default_factory=dict)
    pooled: dict[str, MetricReport] = field(default_factory=dict)
    per_fold: dict[str, list[MetricReport]] = field(default_factory=dict)
    fold_means: dict[str, dict[str, float]] = field(default_factory=dict)
    timing: dict[str, float] = field(default_factory=dict)
    loss_traces: dict[str, list[list[float]]] = field(default_factory=dict)
    scalers: list[ScalerParams] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)
    in_sample: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def succeeded(self) -> tuple[str, ...]:
        return tuple(m for m in self.models if m in self.oof)


def task_seed(seed: int, model: str, fold: int) -> int:
    """RNG seed of one (model, fold) task, independent of scheduling order."""
    ss = np.random.SeedSequence([seed, ALL_MODELS.index(model), fold])
    return int(ss.generate_state(1)[0])


def _fit_predict(model: str, Ztr, ytr, Zte, seed: int, epochs: int):
    """Fit on (Ztr, ytr), predict Zte. Returns (predictions, fit seconds, loss trace)."""
    if model in CLASSICAL:
        t0 = time.perf_counter()
        fitted = classical_models.fit(model, Ztr, ytr, seed=seed)
        elapsed = time.perf_counter() - t0
        return fitted.predict(Zte), elapsed, None
    width = Ztr.shape[1]
    arch = deep_models.build_architecture(model)
    t0 = time.perf_counter()
    net, trace = train(arch.layers, deep_models.encode_sequence(Ztr, width), ytr, TrainConfig(epochs=epochs, seed=seed))
    elapsed = time.perf_counter() - t0
    return predict(net, deep_models.encode_sequence(Zte, width)), elapsed, trace


def hybrid_predict(
    strategy: str,
    lr_oof,
    cgru_oof,
    plan: FoldPlan | None = None,
    refit: Callable[[int, np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Combine linear-regression and CNN-GRU out-of-fold predictions.

    ``average`` is the elementwise mean. ``stacking`` calls
    ``refit(fold, lr_oof[test_rows])`` once per fold of ``plan``; the hook
    retrains the CNN-GRU with the LR prediction as an extra input and
    returns its predictions for that fold's test rows.
    """
    lr_oof = np.asarray(lr_oof, dtype=np.float64)
    cgru_oof = np.asarray(cgru_oof, dtype=np.float64)
    if lr_oof.shape != cgru_oof.shape:
        raise ArgumentError(f"length mismatch: {lr_oof.shape} vs {cgru_oof.shape}")
    if strategy == "average":
        return (lr_oof + cgru_oof) / 2.0
    if strategy != "stacking":
        raise ArgumentError(f"unknown hybrid strategy {strategy!r}")
    if plan is None or refit is None:
        raise ArgumentError("stacking needs a fold plan and a refit hook")
    if plan.n != lr_oof.shape[0]:
        raise ArgumentError(f"plan covers {plan.n} samples, predictions have {lr_oof.shape[0]}")
    out = np.empty_like(lr_oof)
    for i in range(plan.k):
        test = plan.test_indices(i)
        out[test] = refit(i, lr_oof[test])
    return out


def _inner_lr_oof(Z: np.ndarray, y: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Out-of-fold LR predictions inside a training split (meta-input for its rows)."""
    k = min(k, Z.shape[0])
    inner = make_folds(Z.shape[0], k, seed)
    out = np.empty(Z.shape[0])
    for j in range(k):
        tr, te = inner.train_indices(j), inner.test_indices(j)
        out[te] = classical_models.fit_linear_regression(Z[tr], y[tr]).predict(Z[te])
    return out


def stacking_refit(X, y, plan: FoldPlan, config: ExperimentConfig, traces: list, timings: list):
    """Refit hook: CNN-GRU on the nine standardized features plus the LR meta-input."""

    def refit(fold: int, lr_test: np.ndarray) -> np.ndarray:
        t0 = time.perf_counter()
        tr, te = plan.train_indices(fold), plan.test_indices(fold)
        _, transform = standardize(X[tr])
        Ztr, Zte = transform(X[tr]), transform(X[te])
        seed = task_seed(config.seed, HYBRID, fold)
        meta_tr = _inner_lr_oof(Ztr, y[tr], plan.k, seed)
        mu, sd = meta_tr.mean(), meta_tr.std()
        sd = sd if sd > 0 else 1.0
        Ztr10 = np.column_stack([Ztr, (meta_tr - mu) / sd])
        Zte10 = np.column_stack([Zte, (lr_test - mu) / sd])
        pred, _, trace = _fit_predict("cnn-gru", Ztr10, y[tr], Zte10, seed, config.epochs)
        traces.append(trace)
        timings.append(time.perf_counter() - t0)
        return pred

    return refit


def run_experiment(config: ExperimentConfig, dataset: Dataset) -> RunResult:
    X = dataset.features()
    y = dataset.targets()
    n = len(dataset)
    plan = make_folds(n, config.folds, config.seed)
    result = RunResult(config, plan, y, config.models)

    needed = set(config.models)
    if HYBRID in needed:
        needed |= {"lr", "cnn-gru"}
    base = [m for m in ALL_MODELS if m in needed and m != HYBRID]
    oof = {m: np.full(n, np.nan) for m in base}
    timing = {m: 0.0 for m in base}
    traces: dict[str, list] = {m: [] for m in base if m in DEEP}
    failures: dict[str, str] = {}

    for fold in range(plan.k):
        tr, te = plan.train_indices(fold), plan.test_indices(fold)
        scaler, transform = standardize(X[tr])
        result.scalers.append(scaler)
        Ztr, Zte = transform(X[tr]), transform(X[te])
        for model in base:
            if model in failures:
                continue
            try:
                pred, elapsed, trace = _fit_predict(model, Ztr, y[tr], Zte, task_seed(config.seed, model, fold), config.epochs)
            except (TrainingError, ConvergenceError) as exc:
                failures[model] = f"fold {fold}: {exc}"
                log.error("%s failed on fold %d: %s", model, fold, exc)
                continue
            oof[model][te] = pred
            timing[model] += elapsed
            if trace is not None:
                traces[model].append(trace)

    if HYBRID in config.models:
        if "lr" in failures or "cnn-gru" in failures:
            failures[HYBRID] = "component model failed"
        elif config.hybrid_strategy == "average":
            oof[HYBRID] = hybrid_predict("average", oof["lr"], oof["cnn-gru"])
            timing[HYBRID] = timing["lr"] + timing["cnn-gru"]
            traces[HYBRID] = traces["cnn-gru"]
        else:
            hybrid_traces, hybrid_times = [], []
            refit = stacking_refit(X, y, plan, config, hybrid_traces, hybrid_times)
            try:
                oof[HYBRID] = hybrid_predict("stacking", oof["lr"], oof["cnn-gru"], plan, refit)
                timing[HYBRID] = timing["lr"] + sum(hybrid_times)
                traces[HYBRID] = hybrid_traces
            except TrainingError as exc:
                failures[HYBRID] = str(exc)

    for model in config.models:
        if model in failures:
            result.failures[model] = failures[model]
            continue
        pred = oof[model]
        result.oof[model] = pred
        result.timing[model] = timing[model]
        if model in traces:
            result.loss_traces[model] = traces[model]
        result.pooled[model] = compute_report(y, pred)
        reports = [compute_report(y[plan.test_indices(i)], pred[plan.test_indices(i)]) for i in range(plan.k)]
        result.per_fold[model] = reports
        result.fold_means[model] = {kind.lower(): float(np.mean([r.values()[j] for r in reports])) for j, kind in enumerate(KINDS)}

    if config.in_sample:
        result.in_sample = _in_sample(config, X, y, result.succeeded)
    return result


def _in_sample(config: ExperimentConfig, X, y, models) -> dict[str, np.ndarray]:
    """Predictions of models fit on the whole dataset, evaluated on it."""
    _, transform = standardize(X)
    Z = transform(X)
    preds = {}
    for model in models:
        if model == HYBRID:
            continue
        preds[model], _, _ = _fit_predict(model, Z, y, Z, task_seed(config.seed, model, config.folds), config.epochs)
    if HYBRID in models and config.hybrid_strategy == "average":
        lr = preds.get("lr")
        if lr is None:
            lr = _fit_predict("lr", Z, y, Z, 0, 1)[0]
        cgru = preds.get("cnn-gru")
        if cgru is None:
            cgru = _fit_predict("cnn-gru", Z, y, Z, task_seed(config.seed, "cnn-gru", config.folds), config.epochs)[0]
        preds[HYBRID] = hybrid_predict("average", lr, cgru)
    return {m: preds[m] for m in models if m in preds}


def _f(x: float) -> str:
    return f"{x:.17g}"


def _write_rows(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise WeirflowError(f"cannot write {path}: {exc}") from None


def emit_reports(result: RunResult, out_dir: str | Path) -> list[Path]:
    """Write the CSV reports for a run and return the written paths.

    metrics.csv, predictions.csv and the yy files depend only on the
    configuration and data; timing.csv carries wall-clock seconds.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise WeirflowError(f"cannot create {out}: {exc}") from None
    names = [k.lower() for k in KINDS]
    models = result.succeeded
    written = []

    path = out / "metrics.csv"
    rows = [[m, *map(_f, result.pooled[m].values()), *map(_f, log_report(result.pooled[m]))] for m in models]
    _write_rows(path, ["model", *names, *(f"log10_{k}" for k in names)], rows)
    written.append(path)

    path = out / "fold_metrics.csv"
    rows = []
    for m in models:
        for i, report in enumerate(result.per_fold[m]):
            rows.append([m, str(i), *map(_f, report.values())])
        rows.append([m, "mean", *(_f(result.fold_means[m][k]) for k in names)])
    _write_rows(path, ["model", "fold", *names], rows)
    written.append(path)

    fold_of = result.plan.assignments
    path = out / "predictions.csv"
    rows = [
        [str(i), str(fold_of[i]), _f(result.y_true[i]), _f(result.oof[m][i]), m]
        for m in models
        for i in range(len(result.y_true))
    ]
    _write_rows(path, ["sample_index", "fold", "y_true", "y_pred", "model"], rows)
    written.append(path)

    path = out / "timing.csv"
    _write_rows(path, ["model", "seconds"], [[m, f"{result.timing[m]:.6f}"] for m in models])
    written.append(path)

    if result.loss_traces:
        path = out / "loss_trace.csv"
        rows = [
            [m, str(fold), str(epoch + 1), _f(loss)]
            for m in models
            if m in result.loss_traces
            for fold, trace in enumerate(result.loss_traces[m])
            for epoch, loss in enumerate(trace)
        ]
        _write_rows(path, ["model", "fold", "epoch", "loss"], rows)
        written.append(path)

    for m in models:
        path = out / f"yy_{m}.csv"
        _write_rows(path, ["y_true", "y_pred"], [[_f(a), _f(b)] for a, b in zip(result.y_true, result.oof[m])])
        written.append(path)
    for m, pred in result.in_sample.items():
        path = out / f"yy_insample_{m}.csv"
        _write_rows(path, ["y_true", "y_pred"], [[_f(a), _f(b)] for a, b in zip(result.y_true, pred)])
        written.append(path)
    return written
