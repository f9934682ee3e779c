"""Command-line surface of the pipeline.

Subcommands: synth, stats, features, baseline, cross-domain, unified,
predict. A JSON config describes datasets and parameters; command-line
flags override config values. All randomness flows from one master seed,
and every run writes a manifest with the resolved config hash so results
can be replayed exactly.

Exit codes: 0 success, 1 validation/config error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import ingest, report
from .errors import ElephantFlowError, FileError
from .evaluate import (
    RESAMPLE_NONE,
    cross_domain_evaluate,
    cross_validate,
    domain_summary,
    train_unified,
)
from .features import (
    DEFAULT_RULES,
    RuleConstants,
    build_labeled_matrix,
    project_matrix,
    write_feature_artifacts,
)
from .flow import DomainDataset
from .model import (
    ForestParams,
    ModelSpec,
    TreeParams,
    model_from_doc,
    model_to_doc,
)
from .preprocess import ScalerParams, apply_scaler
from .rng import derive_seed
from .thresholding import CHEBYSHEV, PERCENTILE, ThresholdSpec, apply_threshold

BUNDLE_FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _config_hash(resolved: dict) -> str:
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ElephantFlowError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ElephantFlowError(f"config {path} must hold a JSON object")
    return config


def _resolve(args: argparse.Namespace) -> dict:
    """Merge config file and flags (flags win); fill defaults."""
    config = _load_config(args.config)
    resolved = {
        "seed": 42,
        "out": "out",
        "datasets": [],
        "rules": {},
        "model": {},
        "unified_model": {},
        "resampling": {"k_neighbors": 5},
        "cv_folds": 5,
        "synthetic": [],
    }
    resolved.update(config)
    if getattr(args, "seed", None) is not None:
        resolved["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        resolved["out"] = args.out
    for flag, key in (
        ("n_estimators", "n_estimators"),
        ("max_depth", "max_depth"),
        ("criterion", "criterion"),
        ("min_samples_leaf", "min_samples_leaf"),
        ("class_weight", "class_weight"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            resolved["model"] = {**resolved["model"], key: value}
    if getattr(args, "smote_k", None) is not None:
        resolved["resampling"] = {**resolved["resampling"], "k_neighbors": args.smote_k}
    return resolved


def _rules(resolved: dict) -> RuleConstants:
    overrides = resolved.get("rules", {})
    known = set(DEFAULT_RULES.as_dict())
    unknown = set(overrides) - known
    if unknown:
        raise ElephantFlowError(f"unknown rule constants {sorted(unknown)}")
    return RuleConstants(**{**DEFAULT_RULES.as_dict(), **overrides})


def _model_spec(resolved: dict, kind: Optional[str], unified: bool = False) -> ModelSpec:
    section = resolved["unified_model"] if unified else resolved["model"]
    defaults = (
        {"n_estimators": 200, "max_depth": 20, "class_weight": "balanced"}
        if unified
        else {"n_estimators": 100, "max_depth": None, "class_weight": "balanced"}
    )
    merged = {**defaults, **section}
    kind = kind or merged.get("kind", "forest")
    tree = TreeParams(
        criterion=merged.get("criterion", "gini"),
        max_depth=merged.get("max_depth"),
        min_samples_leaf=merged.get("min_samples_leaf", 1),
        class_weight=merged.get("class_weight"),
    )
    forest = ForestParams(
        n_estimators=merged.get("n_estimators", 100),
        tree=tree,
        max_features=merged.get("max_features", "sqrt"),
        bootstrap=merged.get("bootstrap", True),
        seed=resolved["seed"],
    )
    return ModelSpec(kind=kind, forest=forest, tree=tree, knn_k=merged.get("knn_k", 5))


def _load_datasets(resolved: dict, skip_bad_rows: bool) -> list[DomainDataset]:
    entries = resolved.get("datasets", [])
    if not entries:
        raise ElephantFlowError("config lists no datasets")
    datasets = []
    skip_total = 0
    for entry in entries:
        path = entry.get("path")
        if path is None:
            raise ElephantFlowError(f"dataset entry {entry} lacks a path")
        domain = entry.get("domain", "custom")
        mapping = (
            ingest.identity_mapping()
            if entry.get("mapping") in (None, "canonical")
            else ingest.load_mapping(entry["mapping"])
        )
        result = ingest.load_flows(
            path,
            mapping,
            domain_id=domain,
            percentile=entry.get("percentile"),
            skip_bad_rows=skip_bad_rows,
        )
        if result.skipped:
            skip_total += len(result.skipped)
            print(
                f"[{domain}] skipped {len(result.skipped)} bad rows from {path}",
                file=sys.stderr,
            )
        ds = result.dataset
        sample_n = entry.get("sample_n")
        if sample_n is not None:
            ds = ingest.sample_flows(ds, int(sample_n), derive_seed(resolved["seed"], "sample", domain))
        datasets.append(ds)
    return datasets


def _threshold_all(
    datasets: Sequence[DomainDataset], method: str
) -> tuple[list[DomainDataset], list]:
    labeled, stats = [], []
    for ds in datasets:
        spec = (
            ThresholdSpec(CHEBYSHEV)
            if method == CHEBYSHEV
            else ThresholdSpec(PERCENTILE, ds.percentile_p)
        )
        ds2, st = apply_threshold(ds, spec)
        labeled.append(ds2)
        stats.append(st)
    return labeled, stats


class _Run:
    """Collects artifacts of one command run and writes the manifest."""

    def __init__(self, command: str, resolved: dict):
        self.command = command
        self.resolved = resolved
        self.config_hash = _config_hash(resolved)
        self.seed = int(resolved["seed"])
        self.out_dir = Path(resolved["out"])
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: list[Path] = []

    def write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.write_text(text)
        self.artifacts.append(path)
        return path

    def track(self, paths: Sequence[Path]) -> None:
        self.artifacts.extend(paths)

    def report_doc(self) -> dict:
        return report.empty_report(config_hash=self.config_hash, seed=self.seed)

    def finish(self) -> None:
        digests = {}
        for path in sorted(set(self.artifacts)):
            digests[str(path.relative_to(self.out_dir))] = hashlib.sha256(
                path.read_bytes()
            ).hexdigest()
        manifest = {
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "artifacts": digests,
        }
        (self.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _cmd_synth(args: argparse.Namespace) -> int:
    resolved = _resolve(args)
    run = _Run("synth", resolved)
    specs = []
    if resolved.get("synthetic"):
        for entry in resolved["synthetic"]:
            specs.append(ingest.SyntheticDomainSpec(**entry))
    else:
        scales = tuple(float(s) for s in args.scales.split(","))
        specs = ingest.demo_domain_specs(run.seed, n_flows=args.n, scales=scales)
    dataset_entries = []
    for spec in specs:
        ds = ingest.generate_synthetic_domain(spec)
        path = run.out_dir / f"{spec.domain_id}.csv"
        ingest.write_flows(ds, path)
        run.artifacts.append(path)
        dataset_entries.append(
            {
                "path": str(path),
                "domain": spec.domain_id,
                "mapping": None,
                "percentile": spec.percentile_p,
            }
        )
        print(f"wrote {len(ds)} flows to {path}")
    config_doc = {
        "seed": run.seed,
        "out": str(run.out_dir),
        "datasets": dataset_entries,
    }
    run.write_text("synth_config.json", json.dumps(config_doc, indent=2) + "\n")
    run.finish()
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    resolved = _resolve(args)
    run = _Run("stats", resolved)
    rules = _rules(resolved)
    datasets = _load_datasets(resolved, args.skip_bad_rows)
    labeled, _ = _threshold_all(datasets, args.method)
    doc = run.report_doc()
    doc["domains"] = [domain_summary(ds, rules) for ds in labeled]
    run.write_text("report.json", report.emit_report(doc, report.JSON))
    run.track(report.write_figure_data(run.out_dir, doc))
    run.finish()
    print(report.emit_report(doc, report.TABLE), end="")
    return EXIT_OK


def _cmd_features(args: argparse.Namespace) -> int:
    resolved = _resolve(args)
    run = _Run("features", resolved)
    rules = _rules(resolved)
    datasets = _load_datasets(resolved, args.skip_bad_rows)
    labeled, _ = _threshold_all(datasets, PERCENTILE)
    meta = {"config_hash": run.config_hash, "seed": run.seed}
    for ds in labeled:
        matrix = build_labeled_matrix(ds, rules)
        paths = write_feature_artifacts(
            run.out_dir, ds.domain_id, matrix, rules,
            (f.flow_id for f in ds.flows), meta=meta,
        )
        run.track(paths)
        print(f"wrote features for {ds.domain_id}: {matrix.n_rows} rows")
    run.finish()
    return EXIT_OK


def _cmd_baseline(args: argparse.Namespace) -> int:
    resolved = _resolve(args)
    run = _Run("baseline", resolved)
    rules = _rules(resolved)
    spec = _model_spec(resolved, args.model)
    datasets = _load_datasets(resolved, args.skip_bad_rows)
    labeled, _ = _threshold_all(datasets, PERCENTILE)
    doc = run.report_doc()
    doc["domains"] = [domain_summary(ds, rules) for ds in labeled]
    for ds in labeled:
        matrix = build_labeled_matrix(ds, rules)
        cv = cross_validate(
            matrix, spec, k=int(resolved["cv_folds"]),
            seed=derive_seed(run.seed, "baseline", ds.domain_id),
            n_jobs=args.jobs,
        )
        doc["baselines"].append(
            {
                "domain": ds.domain_id,
                "model": spec.kind,
                "samples": matrix.n_rows,
                "features": matrix.n_features,
                "cv": cv.as_dict(),
            }
        )
    run.write_text("report.json", report.emit_report(doc, report.JSON))
    run.finish()
    print(report.emit_report(doc, report.TABLE), end="")
    return EXIT_OK


def _cmd_cross_domain(args: argparse.Namespace) -> int:
    resolved = _resolve(args)
    run = _Run("cross-domain", resolved)
    rules = _rules(resolved)
    spec = _model_spec(resolved, None)
    datasets = _load_datasets(resolved, args.skip_bad_rows)
    labeled, _ = _threshold_all(datasets, PERCENTILE)
    scenarios = cross_domain_evaluate(
        labeled, spec, rules=rules, resample=args.resample,
        smote_k=int(resolved["resampling"]["k_neighbors"]),
        seed=run.seed, n_jobs=args.jobs,
    )
    doc = run.report_doc()
    doc["domains"] = [domain_summary(ds, rules) for ds in labeled]
    doc["scenarios"] = [s.as_dict() for s in scenarios]
    run.write_text("report.json", report.emit_report(doc, report.JSON))
    run.write_text("scenarios.csv", report.emit_report(doc, report.CSV))
    run.track(report.write_figure_data(run.out_dir, doc))
    run.finish()
    print(report.emit_report(doc, report.TABLE), end="")
    return EXIT_OK


def _scaler_doc(scaler: ScalerParams) -> dict:
    return {
        "schema": list(scaler.schema),
        "median": scaler.median.tolist(),
        "iqr": scaler.iqr.tolist(),
    }


def _scaler_from_doc(doc: dict) -> ScalerParams:
    return ScalerParams(
        schema=tuple(doc["schema"]),
        median=np.array(doc["median"], dtype=np.float64),
        iqr=np.array(doc["iqr"], dtype=np.float64),
    )


def _cmd_unified(args: argparse.Namespace) -> int:
    resolved = _resolve(args)
    run = _Run("unified", resolved)
    rules = _rules(resolved)
    spec = _model_spec(resolved, None, unified=True)
    datasets = _load_datasets(resolved, args.skip_bad_rows)
    labeled, _ = _threshold_all(datasets, PERCENTILE)
    result = train_unified(
        labeled, spec, rules=rules,
        smote_k=int(resolved["resampling"]["k_neighbors"]),
        seed=run.seed, k=int(resolved["cv_folds"]), n_jobs=args.jobs,
    )
    importance_entries = report.importances_entries(result.schema, result.importances)
    doc = run.report_doc()
    doc["domains"] = [domain_summary(ds, rules) for ds in labeled]
    doc["unified"] = {
        "cv": result.cv.as_dict(),
        "resampling": result.resampling.as_dict(),
        "feature_count": len(result.schema),
        "thresholds": result.thresholds,
        "domain_sizes": result.domain_sizes,
    }
    doc["importances"] = importance_entries
    bundle = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "config_hash": run.config_hash,
        "seed": run.seed,
        "rules": rules.as_dict(),
        "thresholds": result.thresholds,
        "scaler": _scaler_doc(result.scaler),
        "model": model_to_doc(result.model),
    }
    run.write_text("report.json", report.emit_report(doc, report.JSON))
    run.write_text("model.json", json.dumps(bundle, indent=2) + "\n")
    run.track(report.write_figure_data(run.out_dir, doc))
    run.finish()
    print(report.emit_report(doc, report.TABLE), end="")
    return EXIT_OK


def _cmd_predict(args: argparse.Namespace) -> int:
    try:
        bundle = json.loads(Path(args.model).read_text())
    except OSError as exc:
        raise FileError(f"cannot read model bundle {args.model}: {exc}") from exc
    if bundle.get("format_version") != BUNDLE_FORMAT_VERSION:
        raise ElephantFlowError(
            f"unsupported bundle format version {bundle.get('format_version')!r}"
        )
    model = model_from_doc(bundle["model"])
    scaler = _scaler_from_doc(bundle["scaler"])
    rules = RuleConstants(**bundle["rules"])
    mapping = (
        ingest.identity_mapping() if args.mapping is None else ingest.load_mapping(args.mapping)
    )
    domain = args.domain or "custom"
    percentile = args.percentile
    if percentile is None and args.threshold_bytes is not None:
        percentile = 50.0  # placeholder; the explicit threshold drives the labels
    loaded = ingest.load_flows(
        args.input, mapping, domain_id=domain,
        percentile=percentile, skip_bad_rows=args.skip_bad_rows,
    )
    ds = loaded.dataset
    if args.threshold_bytes is not None:
        threshold = float(args.threshold_bytes)
        labeled = ds.with_labels((ds.byte_values() > threshold).astype(int), threshold)
    else:
        labeled, _ = apply_threshold(ds)
    matrix = build_labeled_matrix(labeled, rules)
    matrix = project_matrix(matrix, tuple(model.schema))
    scaled = apply_scaler(scaler, matrix)
    labels = model.predict(scaled.rows)
    proba = model.predict_proba(scaled.rows)
    out_path = Path(args.predictions)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as handle:
        handle.write("flow_id,predicted_label,elephant_probability\n")
        for flow, label, p in zip(labeled.flows, labels, proba):
            handle.write(f"{flow.flow_id},{int(label)},{float(p)!r}\n")
    print(f"wrote {len(labels)} predictions to {out_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elephantflow",
        description="Cross-domain elephant flow detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, datasets: bool = True) -> None:
        p.add_argument("--config", help="pipeline config JSON")
        p.add_argument("--out", help="output directory (default: config value or ./out)")
        p.add_argument("--seed", type=int, help="master seed (default 42)")
        p.add_argument("--jobs", type=int, default=1, help="worker threads")
        if datasets:
            p.add_argument(
                "--skip-bad-rows", action="store_true",
                help="skip and count unparseable rows instead of failing",
            )

    def model_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--n-estimators", type=int, dest="n_estimators")
        p.add_argument("--max-depth", type=int, dest="max_depth")
        p.add_argument("--criterion", choices=("gini", "entropy"))
        p.add_argument("--min-samples-leaf", type=int, dest="min_samples_leaf")
        p.add_argument("--class-weight", choices=("balanced", "none"), dest="class_weight")
        p.add_argument("--smote-k", type=int, dest="smote_k", help="SMOTE neighbor count")

    p = sub.add_parser("synth", help="generate synthetic surrogate domains")
    common(p, datasets=False)
    p.add_argument("--n", type=int, default=10_000, help="flows per domain")
    p.add_argument("--scales", default="1,2,4", help="byte-scale multipliers, comma separated")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("stats", help="thresholds and domain statistics")
    common(p)
    p.add_argument("--method", choices=(PERCENTILE, CHEBYSHEV), default=PERCENTILE)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("features", help="write feature matrices and schema sidecars")
    common(p)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("baseline", help="within-domain cross-validated baselines")
    common(p)
    p.add_argument("--model", choices=("forest", "tree", "knn", "gaussian_nb"))
    model_flags(p)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("cross-domain", help="all-pairs transfer evaluation")
    common(p)
    p.add_argument(
        "--resample", choices=(RESAMPLE_NONE, "smote_tomek"), default=RESAMPLE_NONE,
        help="resampling applied to each source before training",
    )
    model_flags(p)
    p.set_defaults(func=_cmd_cross_domain)

    p = sub.add_parser("unified", help="train the unified model over all domains")
    common(p)
    model_flags(p)
    p.set_defaults(func=_cmd_unified)

    p = sub.add_parser("predict", help="score a flow CSV with a saved model bundle")
    p.add_argument("--model", required=True, help="model bundle JSON from `unified`")
    p.add_argument("--input", required=True, help="flow CSV to score")
    p.add_argument("--mapping", help="column mapping (name or JSON path); default canonical")
    p.add_argument("--domain", help="domain id, for its default percentile")
    p.add_argument("--percentile", type=float, help="labeling percentile for the input")
    p.add_argument("--threshold-bytes", type=float, dest="threshold_bytes",
                   help="explicit byte threshold (overrides percentile)")
    p.add_argument("--predictions", default="predictions.csv", help="output CSV path")
    p.add_argument("--skip-bad-rows", action="store_true")
    p.set_defaults(func=_cmd_predict)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ElephantFlowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
