"""Metrics, cross-validation, cross-domain transfer, unified training.

Transfer protocol: the scaler is fit on the source domain only and reused
on the target; each domain's feature matrix carries its own byte threshold
as the `threshold` feature. Resampling, when enabled, runs inside training
folds only, never on validation folds or transfer targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput, LengthMismatch
from .features import RuleConstants, DEFAULT_RULES, align_feature_schemas, build_labeled_matrix, project_matrix
from .flow import DomainDataset, LabeledMatrix
from .model import ModelSpec, feature_importances, train_model
from .preprocess import apply_scaler, fit_scaler, smote, smote_tomek, stratified_kfold, tomek_links
from .rng import derive_seed

RESAMPLE_NONE = "none"
RESAMPLE_SMOTE_TOMEK = "smote_tomek"

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class MetricsReport:
    """Confusion counts and derived scores; the positive class is 1."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n_samples(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
        }


def binary_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> MetricsReport:
    """Confusion-matrix metrics with explicit zero-division conventions:
    precision = 0 when nothing is predicted positive, recall = 0 when no
    positives exist, f1 = 0 when precision + recall = 0."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise LengthMismatch(
            f"labels of shape {y_true.shape} vs predictions of shape {y_pred.shape}"
        )
    if y_true.size == 0:
        raise EmptyInput("metrics need at least one sample")
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    n = len(y_true)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return MetricsReport(
        accuracy=(tp + tn) / n,
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
    )


@dataclass(frozen=True)
class CVResult:
    """Per-metric mean and population standard deviation over k folds."""

    means: dict[str, float]
    stds: dict[str, float]
    k: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "metrics": {
                name: {"mean": self.means[name], "std": self.stds[name]}
                for name in METRIC_NAMES
            },
        }


@dataclass(frozen=True)
class ScenarioResult:
    """One source-to-target transfer outcome."""

    source: str
    target: str
    metrics: MetricsReport
    source_samples: int
    target_samples: int

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"transfer scenario needs distinct domains, got {self.source}")

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            **self.metrics.as_dict(),
            "source_samples": self.source_samples,
            "target_samples": self.target_samples,
        }


def cross_validate(
    m: LabeledMatrix,
    spec: ModelSpec,
    k: int = 5,
    seed: int = 42,
    resample: str = RESAMPLE_NONE,
    smote_k: int = 5,
    n_jobs: int = 1,
) -> CVResult:
    """Stratified k-fold CV: per fold, fit the scaler on the training split,
    transform both splits, optionally resample the training split, train,
    and score on the untouched validation split."""
    plan = stratified_kfold(m.labels, k, derive_seed(seed, "folds"))
    per_fold = {name: [] for name in METRIC_NAMES}
    for fold, (train_idx, test_idx) in enumerate(plan.iter_folds()):
        train = LabeledMatrix(m.schema, m.rows[train_idx], m.labels[train_idx])
        test = LabeledMatrix(m.schema, m.rows[test_idx], m.labels[test_idx])
        scaler = fit_scaler(train)
        train = apply_scaler(scaler, train)
        test = apply_scaler(scaler, test)
        X_train, y_train = train.rows, train.labels
        if resample == RESAMPLE_SMOTE_TOMEK:
            X_train, y_train = smote_tomek(
                X_train, y_train, k_neighbors=smote_k, seed=derive_seed(seed, "resample", fold)
            )
        model = train_model(
            X_train, y_train, spec, schema=m.schema,
            seed=derive_seed(seed, "model", fold), n_jobs=n_jobs,
        )
        report = binary_metrics(test.labels, model.predict(test.rows))
        for name in METRIC_NAMES:
            per_fold[name].append(getattr(report, name))
    means = {name: float(np.mean(per_fold[name])) for name in METRIC_NAMES}
    stds = {name: float(np.std(per_fold[name])) for name in METRIC_NAMES}
    return CVResult(means=means, stds=stds, k=k, seed=seed)


def _aligned_matrices(
    domains: Sequence[DomainDataset], rules: RuleConstants
) -> tuple[tuple[str, ...], list[LabeledMatrix]]:
    matrices = [build_labeled_matrix(ds, rules) for ds in domains]
    schema = align_feature_schemas([m.schema for m in matrices])
    return schema, [project_matrix(m, schema) for m in matrices]


def cross_domain_evaluate(
    domains: Sequence[DomainDataset],
    spec: ModelSpec,
    rules: RuleConstants = DEFAULT_RULES,
    resample: str = RESAMPLE_NONE,
    smote_k: int = 5,
    seed: int = 42,
    n_jobs: int = 1,
) -> list[ScenarioResult]:
    """Train on each domain, score on every other: k domains give k*(k-1)
    scenarios, returned sorted by descending F1."""
    if len(domains) < 2:
        raise ValueError("cross-domain evaluation needs at least two domains")
    names = [ds.domain_id for ds in domains]
    if len(set(names)) != len(names):
        raise ValueError(f"domain ids must be unique, got {names}")
    _, matrices = _aligned_matrices(domains, rules)
    results = []
    for si, source in enumerate(matrices):
        scaler = fit_scaler(source)
        source_scaled = apply_scaler(scaler, source)
        X_train, y_train = source_scaled.rows, source_scaled.labels
        if resample == RESAMPLE_SMOTE_TOMEK:
            X_train, y_train = smote_tomek(
                X_train, y_train, k_neighbors=smote_k, seed=derive_seed(seed, "resample", si)
            )
        model = train_model(
            X_train, y_train, spec, schema=source.schema,
            seed=derive_seed(seed, "scenario", si), n_jobs=n_jobs,
        )
        for ti, target in enumerate(matrices):
            if ti == si:
                continue
            target_scaled = apply_scaler(scaler, target)
            report = binary_metrics(target_scaled.labels, model.predict(target_scaled.rows))
            results.append(
                ScenarioResult(
                    source=names[si],
                    target=names[ti],
                    metrics=report,
                    source_samples=source.n_rows,
                    target_samples=target.n_rows,
                )
            )
    results.sort(key=lambda r: -r.metrics.f1)
    return results


@dataclass(frozen=True)
class ResampleSummary:
    """Class-count accounting around resampling."""

    before: tuple[int, int]
    after_smote: tuple[int, int]
    tomek_removed: int
    after: tuple[int, int]

    def as_dict(self) -> dict:
        return {
            "before": {"mice": self.before[0], "elephants": self.before[1]},
            "after_smote": {"mice": self.after_smote[0], "elephants": self.after_smote[1]},
            "tomek_removed": self.tomek_removed,
            "after": {"mice": self.after[0], "elephants": self.after[1]},
        }


@dataclass(frozen=True)
class UnifiedResult:
    """Unified model over all domains plus its evaluation artifacts."""

    model: object
    scaler: object
    cv: CVResult
    importances: np.ndarray
    schema: tuple[str, ...]
    resampling: ResampleSummary
    thresholds: dict[str, float] = field(default_factory=dict)
    domain_sizes: dict[str, int] = field(default_factory=dict)


def train_unified(
    domains: Sequence[DomainDataset],
    spec: ModelSpec,
    rules: RuleConstants = DEFAULT_RULES,
    smote_k: int = 5,
    seed: int = 42,
    k: int = 5,
    n_jobs: int = 1,
) -> UnifiedResult:
    """Concatenate aligned domain matrices, cross-validate with in-fold
    resampling, then fit the final model on the fully balanced corpus."""
    if not domains:
        raise ValueError("unified training needs at least one domain")
    if len(domains) > 1:
        schema, matrices = _aligned_matrices(domains, rules)
    else:
        matrices = [build_labeled_matrix(domains[0], rules)]
        schema = matrices[0].schema
    rows = np.vstack([m.rows for m in matrices])
    labels = np.concatenate([m.labels for m in matrices])
    corpus = LabeledMatrix(schema, rows, labels)
    cv = cross_validate(
        corpus, spec, k=k, seed=seed,
        resample=RESAMPLE_SMOTE_TOMEK, smote_k=smote_k, n_jobs=n_jobs,
    )
    scaler = fit_scaler(corpus)
    scaled = apply_scaler(scaler, corpus)
    before = np.bincount(scaled.labels, minlength=2)
    X_bal, y_bal = smote(
        scaled.rows, scaled.labels, k_neighbors=smote_k, seed=derive_seed(seed, "smote")
    )
    after_smote = np.bincount(y_bal, minlength=2)
    removal = tomek_links(X_bal, y_bal)
    if removal.size:
        keep = np.ones(len(y_bal), dtype=bool)
        keep[removal] = False
        X_bal, y_bal = X_bal[keep], y_bal[keep]
    after = np.bincount(y_bal, minlength=2)
    model = train_model(
        X_bal, y_bal, spec, schema=schema, seed=derive_seed(seed, "final"), n_jobs=n_jobs
    )
    return UnifiedResult(
        model=model,
        scaler=scaler,
        cv=cv,
        importances=feature_importances(model),
        schema=schema,
        resampling=ResampleSummary(
            before=(int(before[0]), int(before[1])),
            after_smote=(int(after_smote[0]), int(after_smote[1])),
            tomek_removed=int(removal.size),
            after=(int(after[0]), int(after[1])),
        ),
        thresholds={ds.domain_id: float(ds.threshold_bytes) for ds in domains},
        domain_sizes={ds.domain_id: len(ds) for ds in domains},
    )


def domain_summary(ds: DomainDataset, rules: RuleConstants = DEFAULT_RULES) -> dict:
    """Per-domain descriptive numbers: size, labeling, security indicators,
    and traffic pattern quantiles (the underlying data of the report
    figures)."""
    if ds.threshold_bytes is None or ds.labels is None:
        raise ValueError(f"domain {ds.domain_id!r} must be thresholded first")
    m = build_labeled_matrix(ds, rules)
    schema = m.schema
    col = {name: m.rows[:, schema.index(name)] for name in schema}
    labels = m.labels

    def quantiles(values: np.ndarray) -> dict:
        q = np.percentile(values, (0, 25, 50, 75, 100))
        return {"min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4]}

    return {
        "domain": ds.domain_id,
        "total_flows": len(ds),
        "elephant_ratio": float(labels.mean()) if len(ds) else 0.0,
        "threshold_bytes": float(ds.threshold_bytes),
        "percentile": ds.percentile_p,
        "feature_count": len(schema),
        "security": {
            "avg_security_score": float(col["security_score"].mean()),
            "suspicious_ratio": float(col["is_suspicious"].mean()),
            "highly_suspicious_ratio": float(col["is_highly_suspicious"].mean()),
            "potential_scan_ratio": float(col["potential_scan"].mean()),
        },
        "applications": {
            name[len("app_"):]: float(col[name].mean())
            for name in schema
            if name.startswith("app_")
        },
        "traffic_patterns": {
            name: quantiles(col[name])
            for name in ("total_bytes", "bytes_per_second", "avg_packet_size", "duration_seconds")
        },
    }
