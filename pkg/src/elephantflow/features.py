"""Canonical 24-feature extraction and cross-domain schema alignment.

Four feature groups: universal flow statistics, port-based application
one-hots, security indicators, and derived size/rate features, plus the
domain's own byte threshold injected as a feature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyIntersection, SchemaMismatch
from .flow import DomainDataset, FlowRecord, LabeledMatrix

FeatureSchema = tuple[str, ...]

CANONICAL_SCHEMA: FeatureSchema = (
    "src_port",
    "dst_port",
    "protocol",
    "total_bytes",
    "total_packets",
    "duration_seconds",
    "app_web",
    "app_dns",
    "app_mail",
    "app_remote",
    "app_file",
    "app_streaming",
    "app_other",
    "security_score",
    "is_suspicious",
    "is_highly_suspicious",
    "potential_scan",
    "is_udp",
    "bytes_per_second",
    "avg_packet_size",
    "is_small_flow",
    "is_medium_flow",
    "is_large_flow",
    "threshold",
)


class AppCategory(str, Enum):
    WEB = "web"
    DNS = "dns"
    MAIL = "mail"
    REMOTE_ACCESS = "remote_access"
    FILE_TRANSFER = "file_transfer"
    STREAMING = "streaming"
    OTHER = "other"


# Lookup precedence; overlapping ports (22 is both remote-access and
# file-transfer) resolve to the earlier category.
APP_PORTS: dict[AppCategory, frozenset[int]] = {
    AppCategory.WEB: frozenset({80, 443, 8080, 8443, 8000, 3000}),
    AppCategory.DNS: frozenset({53, 853}),
    AppCategory.MAIL: frozenset({25, 110, 143, 465, 587, 993, 995}),
    AppCategory.REMOTE_ACCESS: frozenset({3389, 5900, 5901, 22}),
    AppCategory.FILE_TRANSFER: frozenset({20, 21, 22, 989, 990, 115}),
    AppCategory.STREAMING: frozenset({554, 1935, 3478, 5004, 8081, 1936}),
}

APP_FEATURE_NAMES: dict[AppCategory, str] = {
    AppCategory.WEB: "app_web",
    AppCategory.DNS: "app_dns",
    AppCategory.MAIL: "app_mail",
    AppCategory.REMOTE_ACCESS: "app_remote",
    AppCategory.FILE_TRANSFER: "app_file",
    AppCategory.STREAMING: "app_streaming",
    AppCategory.OTHER: "app_other",
}

BACKDOOR_PORTS = frozenset({12345, 31337, 54320, 9999, 1337})
MALWARE_PORTS = frozenset({4444, 5555, 6666, 6667})

# Rate features divide by at least this many seconds (1 ms floor).
MIN_RATE_DURATION_S = 0.001

SMALL_FLOW_BYTES = 1000
LARGE_FLOW_BYTES = 10000


@dataclass(frozen=True)
class RuleConstants:
    """Tunable constants of the security heuristics.

    Scores add backdoor_weight per flow touching a backdoor port,
    malware_weight per malware-associated port, anomaly_weight for TCP on
    unusual high ports outside every application category, and scan_weight
    when packet count is high while average packet size is small.
    """

    scan_min_packets: int = 20
    scan_max_avg_bytes: float = 64.0
    backdoor_weight: int = 2
    malware_weight: int = 1
    anomaly_weight: int = 1
    scan_weight: int = 1
    suspicious_cutoff: int = 1
    highly_suspicious_cutoff: int = 2
    anomaly_port_floor: int = 10000

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_RULES = RuleConstants()


@dataclass(frozen=True)
class SecurityIndicators:
    security_score: int
    is_suspicious: bool
    is_highly_suspicious: bool
    potential_scan: bool

    def __post_init__(self):
        if self.is_highly_suspicious and not self.is_suspicious:
            raise ValueError("is_highly_suspicious implies is_suspicious")


def classify_application(src_port: int, dst_port: int) -> AppCategory:
    """Port-based application category; destination port wins over source."""
    for port in (dst_port, src_port):
        for category, ports in APP_PORTS.items():
            if port in ports:
                return category
    return AppCategory.OTHER


def compute_security(flow: FlowRecord, rules: RuleConstants = DEFAULT_RULES) -> SecurityIndicators:
    """Security score and flags for one validated flow."""
    score = 0
    flow_ports = (flow.src_port, flow.dst_port)
    if any(p in BACKDOOR_PORTS for p in flow_ports):
        score += rules.backdoor_weight
    if any(p in MALWARE_PORTS for p in flow_ports):
        score += rules.malware_weight
    category = classify_application(flow.src_port, flow.dst_port)
    protocol_anomaly = (
        flow.protocol == 6
        and flow.src_port > rules.anomaly_port_floor
        and flow.dst_port > rules.anomaly_port_floor
        and category is AppCategory.OTHER
    )
    if protocol_anomaly:
        score += rules.anomaly_weight
    avg_packet_size = flow.total_bytes / flow.total_packets
    potential_scan = (
        flow.total_packets >= rules.scan_min_packets
        and avg_packet_size < rules.scan_max_avg_bytes
    )
    if potential_scan:
        score += rules.scan_weight
    return SecurityIndicators(
        security_score=score,
        is_suspicious=score >= rules.suspicious_cutoff,
        is_highly_suspicious=score >= rules.highly_suspicious_cutoff,
        potential_scan=potential_scan,
    )


def extract_features(
    flow: FlowRecord,
    domain_threshold: float,
    rules: RuleConstants = DEFAULT_RULES,
) -> np.ndarray:
    """Canonical 24-entry feature vector for one flow.

    Pure: identical flow and threshold give an identical vector. Guards
    keep every entry finite (duration floor for rates).
    """
    if not domain_threshold > 0:
        raise ValueError(f"domain_threshold must be positive, got {domain_threshold}")
    duration_s = (flow.last_seen_ms - flow.first_seen_ms) / 1000.0
    bytes_per_second = flow.total_bytes / max(duration_s, MIN_RATE_DURATION_S)
    avg_packet_size = flow.total_bytes / flow.total_packets
    category = classify_application(flow.src_port, flow.dst_port)
    security = compute_security(flow, rules)
    vector = np.zeros(len(CANONICAL_SCHEMA), dtype=np.float64)
    vector[0] = flow.src_port
    vector[1] = flow.dst_port
    vector[2] = flow.protocol
    vector[3] = flow.total_bytes
    vector[4] = flow.total_packets
    vector[5] = duration_s
    vector[CANONICAL_SCHEMA.index(APP_FEATURE_NAMES[category])] = 1.0
    vector[13] = security.security_score
    vector[14] = float(security.is_suspicious)
    vector[15] = float(security.is_highly_suspicious)
    vector[16] = float(security.potential_scan)
    vector[17] = float(flow.protocol == 17)
    vector[18] = bytes_per_second
    vector[19] = avg_packet_size
    vector[20] = float(flow.total_bytes < SMALL_FLOW_BYTES)
    vector[21] = float(SMALL_FLOW_BYTES <= flow.total_bytes <= LARGE_FLOW_BYTES)
    vector[22] = float(flow.total_bytes > LARGE_FLOW_BYTES)
    vector[23] = domain_threshold
    return vector


def _category_codes(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Vectorized classify_application over port arrays, as category indices."""
    categories = list(APP_PORTS)
    codes = np.full(src.shape, len(categories), dtype=np.int64)  # other
    # Walk precedence backwards so earlier categories overwrite later ones,
    # then let dst matches overwrite src matches.
    for port_array in (src, dst):
        hit = np.full(port_array.shape, -1, dtype=np.int64)
        for i in reversed(range(len(categories))):
            members = np.isin(port_array, tuple(APP_PORTS[categories[i]]))
            hit[members] = i
        codes = np.where(hit >= 0, hit, codes)
    return codes


def extract_matrix(
    flows: Sequence[FlowRecord],
    domain_threshold: float,
    rules: RuleConstants = DEFAULT_RULES,
) -> np.ndarray:
    """Vectorized extract_features over many flows (row order preserved)."""
    if not domain_threshold > 0:
        raise ValueError(f"domain_threshold must be positive, got {domain_threshold}")
    n = len(flows)
    out = np.zeros((n, len(CANONICAL_SCHEMA)), dtype=np.float64)
    if n == 0:
        return out
    src = np.array([f.src_port for f in flows], dtype=np.int64)
    dst = np.array([f.dst_port for f in flows], dtype=np.int64)
    proto = np.array([f.protocol for f in flows], dtype=np.int64)
    total_bytes = np.array([f.total_bytes for f in flows], dtype=np.float64)
    packets = np.array([f.total_packets for f in flows], dtype=np.float64)
    duration_s = np.array([f.last_seen_ms - f.first_seen_ms for f in flows], dtype=np.float64) / 1000.0
    avg_packet_size = total_bytes / packets
    codes = _category_codes(src, dst)
    other_code = len(APP_PORTS)
    backdoor = np.isin(src, tuple(BACKDOOR_PORTS)) | np.isin(dst, tuple(BACKDOOR_PORTS))
    malware = np.isin(src, tuple(MALWARE_PORTS)) | np.isin(dst, tuple(MALWARE_PORTS))
    anomaly = (
        (proto == 6)
        & (src > rules.anomaly_port_floor)
        & (dst > rules.anomaly_port_floor)
        & (codes == other_code)
    )
    scan = (packets >= rules.scan_min_packets) & (avg_packet_size < rules.scan_max_avg_bytes)
    score = (
        backdoor * rules.backdoor_weight
        + malware * rules.malware_weight
        + anomaly * rules.anomaly_weight
        + scan * rules.scan_weight
    )
    out[:, 0] = src
    out[:, 1] = dst
    out[:, 2] = proto
    out[:, 3] = total_bytes
    out[:, 4] = packets
    out[:, 5] = duration_s
    app_base = CANONICAL_SCHEMA.index("app_web")
    out[np.arange(n), app_base + codes] = 1.0
    out[:, 13] = score
    out[:, 14] = score >= rules.suspicious_cutoff
    out[:, 15] = score >= rules.highly_suspicious_cutoff
    out[:, 16] = scan
    out[:, 17] = proto == 17
    out[:, 18] = total_bytes / np.maximum(duration_s, MIN_RATE_DURATION_S)
    out[:, 19] = avg_packet_size
    out[:, 20] = total_bytes < SMALL_FLOW_BYTES
    out[:, 21] = (SMALL_FLOW_BYTES <= total_bytes) & (total_bytes <= LARGE_FLOW_BYTES)
    out[:, 22] = total_bytes > LARGE_FLOW_BYTES
    out[:, 23] = domain_threshold
    return out


def build_labeled_matrix(ds: DomainDataset, rules: RuleConstants = DEFAULT_RULES) -> LabeledMatrix:
    """Featurize a thresholded, labeled dataset under the canonical schema."""
    if ds.threshold_bytes is None or ds.labels is None:
        raise ValueError(f"domain {ds.domain_id!r} must be thresholded and labeled first")
    rows = extract_matrix(ds.flows, ds.threshold_bytes, rules)
    return LabeledMatrix(schema=CANONICAL_SCHEMA, rows=rows, labels=ds.label_array())


def align_feature_schemas(schemas: Sequence[FeatureSchema]) -> FeatureSchema:
    """Ordered intersection of feature names across domains.

    Order follows the first schema (canonical order for matrices produced
    here). Raises EmptyIntersection when no name is shared.
    """
    if len(schemas) < 2:
        raise ValueError("schema alignment needs at least two schemas")
    shared = set(schemas[0])
    for schema in schemas[1:]:
        shared &= set(schema)
    aligned = tuple(name for name in schemas[0] if name in shared)
    if not aligned:
        raise EmptyIntersection("feature schemas share no names")
    return aligned


def project_matrix(m: LabeledMatrix, target: FeatureSchema) -> LabeledMatrix:
    """Restrict a matrix to `target` columns, preserving per-row values."""
    missing = [name for name in target if name not in m.schema]
    if missing:
        raise SchemaMismatch(f"matrix lacks features {missing}")
    columns = [m.schema.index(name) for name in target]
    return LabeledMatrix(schema=tuple(target), rows=m.rows[:, columns], labels=m.labels)


def write_feature_artifacts(
    out_dir: str | Path,
    domain_id: str,
    matrix: LabeledMatrix,
    rules: RuleConstants,
    flow_ids: Iterable[str],
    meta: dict | None = None,
) -> list[Path]:
    """Write the feature matrix CSV, label CSV, and the sidecar JSON that
    records schema order, port lists, and rule constants for audits."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix_path = out_dir / f"features_{domain_id}.csv"
    labels_path = out_dir / f"features_{domain_id}_labels.csv"
    sidecar_path = out_dir / f"features_{domain_id}.schema.json"
    header = ",".join(matrix.schema)
    np.savetxt(matrix_path, matrix.rows, delimiter=",", header=header, comments="", fmt="%.17g")
    with open(labels_path, "w", newline="") as handle:
        handle.write("flow_id,label\n")
        for flow_id, label in zip(flow_ids, matrix.labels):
            handle.write(f"{flow_id},{int(label)}\n")
    sidecar = {
        "schema": list(matrix.schema),
        "port_lists": {
            "applications": {cat.value: sorted(ports) for cat, ports in APP_PORTS.items()},
            "backdoor": sorted(BACKDOOR_PORTS),
            "malware": sorted(MALWARE_PORTS),
        },
        "rules": rules.as_dict(),
    }
    if meta:
        sidecar.update(meta)
    sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n")
    return [matrix_path, labels_path, sidecar_path]
