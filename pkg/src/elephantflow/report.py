"""Deterministic report emission: JSON documents, text tables, figure CSVs.

The full report document has the shape
{config_hash, seed, domains, scenarios, baselines, unified, importances};
commands fill the sections they produce. JSON serialization is stable:
emit(parse(emit(x))) is byte-identical to emit(x).
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

from .errors import ElephantFlowError

JSON = "json"
TABLE = "table"
CSV = "csv"

SCENARIO_COLUMNS = (
    "Scenario",
    "Accuracy",
    "Precision",
    "Recall",
    "F1-Score",
    "Source Samples",
    "Target Samples",
)


def empty_report(config_hash: str = "", seed: int = 42) -> dict:
    return {
        "config_hash": config_hash,
        "seed": seed,
        "domains": [],
        "scenarios": [],
        "baselines": [],
        "unified": {},
        "importances": [],
    }


def emit_report(report: dict, fmt: str = JSON) -> str:
    """Render a report document as json, table, or csv (scenario rows)."""
    if fmt == JSON:
        return json.dumps(report, indent=2) + "\n"
    if fmt == TABLE:
        return render_tables(report)
    if fmt == CSV:
        return scenarios_csv(report.get("scenarios", []))
    raise ElephantFlowError(f"unknown report format {fmt!r}")


def render_tables(report: dict) -> str:
    parts = []
    if report.get("domains"):
        parts.append(domain_stats_table(report["domains"]))
    if report.get("baselines"):
        parts.append(baselines_table(report["baselines"]))
    if report.get("scenarios"):
        parts.append(scenarios_table(report["scenarios"]))
    if report.get("unified"):
        parts.append(unified_table(report["unified"]))
    if report.get("importances"):
        parts.append(importances_table(report["importances"]))
    return "\n".join(parts) if parts else "(empty report)\n"


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]], title: str) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [title]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def domain_stats_table(domains: Sequence[dict]) -> str:
    rows = [
        [
            d["domain"],
            f"{d['total_flows']:,}",
            f"{100.0 * d['elephant_ratio']:.1f}%",
            f"{d['threshold_bytes']:,.2f}",
        ]
        for d in domains
    ]
    return _table(
        ("Domain", "Total Flows", "Elephant Ratio", "Threshold (bytes)"),
        rows,
        "Domain statistics",
    )


def scenarios_table(scenarios: Sequence[dict]) -> str:
    rows = [
        [
            f"{s['source']} -> {s['target']}",
            f"{s['accuracy']:.4f}",
            f"{s['precision']:.4f}",
            f"{s['recall']:.4f}",
            f"{s['f1']:.4f}",
            f"{s['source_samples']:,}",
            f"{s['target_samples']:,}",
        ]
        for s in scenarios
    ]
    return _table(SCENARIO_COLUMNS, rows, "Cross-domain performance")


def baselines_table(baselines: Sequence[dict]) -> str:
    rows = []
    for b in baselines:
        f1 = b["cv"]["metrics"]["f1"]
        rows.append(
            [
                b["domain"],
                b.get("model", "forest"),
                f"{f1['mean']:.4f} (±{f1['std']:.4f})",
                f"{b['samples']:,}",
                str(b["features"]),
            ]
        )
    return _table(
        ("Domain", "Model", "F1 (CV)", "Samples", "Features"), rows, "Within-domain baselines"
    )


def unified_table(unified: dict) -> str:
    cv = unified["cv"]["metrics"]["f1"]
    resampling = unified["resampling"]
    rows = [
        ["CV F1", f"{cv['mean']:.4f} (±{cv['std']:.4f})"],
        [
            "Samples before resampling",
            f"{resampling['before']['mice'] + resampling['before']['elephants']:,}",
        ],
        [
            "Samples after resampling",
            f"{resampling['after']['mice'] + resampling['after']['elephants']:,}",
        ],
        [
            "Class balance after SMOTE",
            f"{resampling['after_smote']['elephants']:,} elephants, "
            f"{resampling['after_smote']['mice']:,} mice",
        ],
        ["Tomek links removed", f"{resampling['tomek_removed']:,}"],
        ["Common features", str(unified["feature_count"])],
    ]
    return _table(("Quantity", "Value"), rows, "Unified model")


def importances_table(importances: Sequence[dict], top: int = 15) -> str:
    rows = [[e["name"], f"{e['value']:.4f}"] for e in importances[:top]]
    return _table(("Feature", "Importance"), rows, f"Feature importance (top {len(rows)})")


def scenarios_csv(scenarios: Sequence[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["source", "target", "accuracy", "precision", "recall", "f1",
                     "source_samples", "target_samples"])
    for s in scenarios:
        writer.writerow(
            [s["source"], s["target"], repr(s["accuracy"]), repr(s["precision"]),
             repr(s["recall"]), repr(s["f1"]), s["source_samples"], s["target_samples"]]
        )
    return buffer.getvalue()


def importances_entries(schema: Sequence[str], values) -> list[dict]:
    """Schema/importance pairs sorted by descending importance."""
    entries = [
        {"name": name, "value": float(value)} for name, value in zip(schema, values)
    ]
    entries.sort(key=lambda e: -e["value"])
    return entries


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_figure_data(out_dir: str | Path, report: dict) -> list[Path]:
    """Write the figure-underlying CSVs for whichever sections are present."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    domains = report.get("domains", [])
    if domains:
        written.append(
            _write_csv(
                out_dir / "fig_domain_stats.csv",
                ["domain", "total_flows", "elephant_ratio", "threshold_bytes",
                 "feature_count", "avg_security_score"],
                [
                    [d["domain"], d["total_flows"], repr(d["elephant_ratio"]),
                     repr(d["threshold_bytes"]), d["feature_count"],
                     repr(d["security"]["avg_security_score"])]
                    for d in domains
                ],
            )
        )
        written.append(
            _write_csv(
                out_dir / "fig_security.csv",
                ["domain", "avg_security_score", "suspicious_ratio",
                 "highly_suspicious_ratio", "potential_scan_ratio"],
                [
                    [d["domain"], repr(d["security"]["avg_security_score"]),
                     repr(d["security"]["suspicious_ratio"]),
                     repr(d["security"]["highly_suspicious_ratio"]),
                     repr(d["security"]["potential_scan_ratio"])]
                    for d in domains
                ],
            )
        )
        pattern_rows = []
        for d in domains:
            for metric, q in d["traffic_patterns"].items():
                pattern_rows.append(
                    [d["domain"], metric, repr(q["min"]), repr(q["q1"]),
                     repr(q["median"]), repr(q["q3"]), repr(q["max"])]
                )
        written.append(
            _write_csv(
                out_dir / "fig_traffic_patterns.csv",
                ["domain", "metric", "min", "q1", "median", "q3", "max"],
                pattern_rows,
            )
        )
    scenarios = report.get("scenarios", [])
    if scenarios:
        written.append(
            _write_csv(
                out_dir / "fig_cross_domain.csv",
                ["source", "target", "f1", "accuracy"],
                [[s["source"], s["target"], repr(s["f1"]), repr(s["accuracy"])] for s in scenarios],
            )
        )
    importances = report.get("importances", [])
    if importances:
        written.append(
            _write_csv(
                out_dir / "fig_importances.csv",
                ["feature", "importance"],
                [[e["name"], repr(e["value"])] for e in importances],
            )
        )
    return written
