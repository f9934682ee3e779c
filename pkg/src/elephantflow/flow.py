"""Core domain types: flow records, per-domain datasets, labeled matrices.

All types are immutable after construction and safe to share read-only
across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidFlow

PORT_MAX = 65535


@dataclass(frozen=True)
class FlowRecord:
    """One bidirectional network flow.

    Byte and packet totals cover both directions; unidirectional sources
    must be summed during ingestion. `flow_id` is carried for traceability
    only and is never used as a model feature.
    """

    flow_id: str
    src_port: int
    dst_port: int
    protocol: int
    total_bytes: int
    total_packets: int
    first_seen_ms: int
    last_seen_ms: int

    @property
    def duration_ms(self) -> int:
        return self.last_seen_ms - self.first_seen_ms


def validate_flow(record: FlowRecord) -> FlowRecord:
    """Return `record` unchanged iff every field invariant holds.

    Raises InvalidFlow naming the first violated field. Idempotent: a
    record that passes once passes again.
    """
    if not isinstance(record.flow_id, str):
        raise InvalidFlow("flow_id", "must be a string")
    for name in ("src_port", "dst_port"):
        port = getattr(record, name)
        if not isinstance(port, (int, np.integer)) or isinstance(port, bool):
            raise InvalidFlow(name, "must be an integer")
        if not 0 <= port <= PORT_MAX:
            raise InvalidFlow(name, f"{port} outside [0, {PORT_MAX}]")
    if not isinstance(record.protocol, (int, np.integer)) or not 0 <= record.protocol <= 255:
        raise InvalidFlow("protocol", f"{record.protocol} is not an IANA protocol number")
    if not isinstance(record.total_bytes, (int, np.integer)) or record.total_bytes < 0:
        raise InvalidFlow("total_bytes", f"{record.total_bytes} is negative")
    if not isinstance(record.total_packets, (int, np.integer)) or record.total_packets < 1:
        raise InvalidFlow("total_packets", f"{record.total_packets} is below 1")
    for name in ("first_seen_ms", "last_seen_ms"):
        if not isinstance(getattr(record, name), (int, np.integer)):
            raise InvalidFlow(name, "must be integer epoch milliseconds")
    if record.last_seen_ms < record.first_seen_ms:
        raise InvalidFlow(
            "last_seen_ms",
            f"{record.last_seen_ms} precedes first_seen_ms={record.first_seen_ms}",
        )
    return record


@dataclass(frozen=True)
class DomainDataset:
    """A named collection of flows plus its labeling percentile and threshold.

    `threshold_bytes` and `labels` stay None until thresholding runs;
    updates go through `with_labels`, which returns a new instance.
    """

    domain_id: str
    flows: tuple[FlowRecord, ...]
    percentile_p: float
    threshold_bytes: Optional[float] = None
    labels: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "flows", tuple(self.flows))
        if not 0.0 < self.percentile_p < 100.0:
            raise ValueError(f"percentile_p must lie in (0, 100), got {self.percentile_p}")
        if self.threshold_bytes is not None and not self.threshold_bytes > 0:
            raise ValueError(f"threshold_bytes must be positive, got {self.threshold_bytes}")
        if self.labels is not None:
            labels = tuple(int(v) for v in self.labels)
            if len(labels) != len(self.flows):
                raise ValueError(
                    f"{len(labels)} labels for {len(self.flows)} flows"
                )
            if any(v not in (0, 1) for v in labels):
                raise ValueError("labels must be 0 or 1")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.flows)

    def with_labels(self, labels: Sequence[int], threshold_bytes: float) -> "DomainDataset":
        """New dataset carrying `labels` and the threshold that produced them."""
        return replace(self, labels=tuple(int(v) for v in labels), threshold_bytes=float(threshold_bytes))

    def byte_values(self) -> np.ndarray:
        return np.array([f.total_bytes for f in self.flows], dtype=np.float64)

    def label_array(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError(f"domain {self.domain_id!r} has no labels yet")
        return np.array(self.labels, dtype=np.int64)


@dataclass(frozen=True)
class LabeledMatrix:
    """Feature rows plus aligned binary labels under a fixed schema."""

    schema: tuple[str, ...]
    rows: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if rows.ndim != 2:
            raise ValueError(f"rows must be 2-D, got shape {rows.shape}")
        if rows.shape[1] != len(self.schema):
            raise ValueError(
                f"{rows.shape[1]} columns for schema of length {len(self.schema)}"
            )
        if labels.ndim != 1 or labels.shape[0] != rows.shape[0]:
            raise ValueError(
                f"{labels.shape[0] if labels.ndim == 1 else labels.shape} labels "
                f"for {rows.shape[0]} rows"
            )
        if rows.size and not np.all(np.isfinite(rows)):
            raise ValueError("rows contain non-finite entries")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        rows.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]
