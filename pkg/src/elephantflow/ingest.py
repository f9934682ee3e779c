"""Flow CSV ingestion, sampling, and synthetic surrogate domains.

Canonical flow CSV column order:
flow_id, src_port, dst_port, protocol, total_bytes, total_packets,
first_seen_ms, last_seen_ms.

Heterogeneous sources are adapted through a ColumnMapping: per canonical
field either one source column, a list of source columns (summed, for
unidirectional datasets), or a constant default, plus an optional unit
transform. Mapping configs for the known dataset shapes ship under
elephantflow/mappings/.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    FileError,
    InvalidFlow,
    MappingError,
    RowError,
    SampleTooLarge,
    SpecError,
)
from .flow import DomainDataset, FlowRecord, validate_flow
from .rng import generator
from .thresholding import default_percentile

CANONICAL_COLUMNS = (
    "flow_id",
    "src_port",
    "dst_port",
    "protocol",
    "total_bytes",
    "total_packets",
    "first_seen_ms",
    "last_seen_ms",
)

_INT_FIELDS = CANONICAL_COLUMNS[1:]

TRANSFORMS = {
    "identity": lambda v: v,
    "seconds_to_milliseconds": lambda v: v * 1000.0,
    "microseconds_to_milliseconds": lambda v: v / 1000.0,
}


@dataclass(frozen=True)
class ColumnMapping:
    """How one dataset shape maps onto the canonical flow fields."""

    columns: Mapping[str, str | Sequence[str]]
    transforms: Mapping[str, str] = field(default_factory=dict)
    defaults: Mapping[str, int | str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", dict(self.columns))
        object.__setattr__(self, "transforms", dict(self.transforms))
        object.__setattr__(self, "defaults", dict(self.defaults))
        for canonical in self.columns:
            if canonical not in CANONICAL_COLUMNS:
                raise MappingError(canonical, f"{canonical!r} is not a canonical flow field")
        for canonical, name in self.transforms.items():
            if name not in TRANSFORMS:
                raise MappingError(canonical, f"unknown transform {name!r}")
        for canonical in CANONICAL_COLUMNS:
            if canonical == "flow_id":
                continue  # synthesized from the row index when unmapped
            if canonical not in self.columns and canonical not in self.defaults:
                raise MappingError(canonical, f"no column or default for {canonical!r}")

    def source_columns(self, canonical: str) -> tuple[str, ...]:
        source = self.columns.get(canonical)
        if source is None:
            return ()
        if isinstance(source, str):
            return (source,)
        return tuple(source)


def identity_mapping() -> ColumnMapping:
    """Mapping for the canonical CSV layout itself."""
    return ColumnMapping(columns={c: c for c in CANONICAL_COLUMNS})


def load_mapping(source: str | Path) -> ColumnMapping:
    """Load a mapping config: a JSON path, or the name of a shipped shape.

    Shipped shapes: campus (NFStream-style), unsw, cic.
    """
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        ref = resources.files("elephantflow.mappings").joinpath(f"{source}.json")
        if not ref.is_file():
            raise FileError(f"no mapping file or shipped mapping named {source!r}")
        text = ref.read_text()
    doc = json.loads(text)
    return ColumnMapping(
        columns=doc.get("columns", {}),
        transforms=doc.get("transforms", {}),
        defaults=doc.get("defaults", {}),
    )


@dataclass(frozen=True)
class LoadResult:
    """Loaded dataset plus (line, reason) for rows skipped under skip policy."""

    dataset: DomainDataset
    skipped: tuple[tuple[int, str], ...] = ()


def load_flows(
    path: str | Path,
    mapping: ColumnMapping,
    domain_id: str = "custom",
    percentile: Optional[float] = None,
    skip_bad_rows: bool = False,
) -> LoadResult:
    """Load one flow CSV into a DomainDataset, preserving row order.

    Rows failing conversion or validation raise RowError under the default
    fail-fast policy, or are counted and dropped when `skip_bad_rows` is set.
    """
    if percentile is None:
        percentile = default_percentile(domain_id)
        if percentile is None:
            raise ValueError(f"domain {domain_id!r} has no default percentile; supply one")
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise FileError(f"cannot open {path}: {exc}") from exc
    flows: list[FlowRecord] = []
    skipped: list[tuple[int, str]] = []
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise FileError(f"{path} has no header row")
        header = set(reader.fieldnames)
        for canonical in CANONICAL_COLUMNS:
            for column in mapping.source_columns(canonical):
                if column not in header:
                    raise MappingError(column)
        for index, row in enumerate(reader):
            line = index + 2  # 1-based, after the header row
            try:
                flows.append(_convert_row(row, index, mapping))
            except (RowError, InvalidFlow) as exc:
                if not skip_bad_rows:
                    if isinstance(exc, RowError):
                        raise
                    raise RowError(line, str(exc)) from exc
                skipped.append((line, str(exc)))
    dataset = DomainDataset(domain_id=domain_id, flows=tuple(flows), percentile_p=percentile)
    return LoadResult(dataset=dataset, skipped=tuple(skipped))


def _convert_row(row: Mapping[str, str], index: int, mapping: ColumnMapping) -> FlowRecord:
    values: dict[str, int | str] = {}
    sources = mapping.source_columns("flow_id")
    if sources:
        values["flow_id"] = row[sources[0]]
    elif "flow_id" in mapping.defaults:
        values["flow_id"] = str(mapping.defaults["flow_id"])
    else:
        values["flow_id"] = f"r{index}"
    for canonical in _INT_FIELDS:
        sources = mapping.source_columns(canonical)
        if sources:
            total = 0.0
            for column in sources:
                cell = row.get(column)
                if cell is None or cell.strip() == "":
                    raise RowError(index + 2, f"missing value in column {column!r}")
                try:
                    total += float(cell)
                except ValueError:
                    raise RowError(index + 2, f"non-numeric value {cell!r} in column {column!r}")
            transform = TRANSFORMS[mapping.transforms.get(canonical, "identity")]
            values[canonical] = int(round(transform(total)))
        else:
            values[canonical] = int(mapping.defaults[canonical])
    return validate_flow(FlowRecord(**values))


def write_flows(ds: DomainDataset, path: str | Path) -> None:
    """Write a dataset as canonical flow CSV (exact field round trip)."""
    try:
        handle = open(path, "w", newline="")
    except OSError as exc:
        raise FileError(f"cannot write {path}: {exc}") from exc
    with handle:
        writer = csv.writer(handle)
        writer.writerow(CANONICAL_COLUMNS)
        for f in ds.flows:
            writer.writerow(
                [
                    f.flow_id,
                    f.src_port,
                    f.dst_port,
                    f.protocol,
                    f.total_bytes,
                    f.total_packets,
                    f.first_seen_ms,
                    f.last_seen_ms,
                ]
            )


def sample_flows(ds: DomainDataset, n: int, seed: int) -> DomainDataset:
    """Uniform sample of `n` flows without replacement, seed-deterministic.

    Uses a seeded partial Fisher-Yates shuffle. Labels and threshold are
    cleared; domain id and percentile are preserved.
    """
    total = len(ds)
    if n > total:
        raise SampleTooLarge(f"requested {n} flows from a dataset of {total}")
    rng = generator(seed)
    indices = np.arange(total)
    for i in range(n):
        j = int(rng.integers(i, total))
        indices[i], indices[j] = indices[j], indices[i]
    chosen = indices[:n]
    return DomainDataset(
        domain_id=ds.domain_id,
        flows=tuple(ds.flows[i] for i in chosen),
        percentile_p=ds.percentile_p,
    )


_DEFAULT_PORTS = (443, 80, 8080, 53, 22, 25, 3389, 554, 993, 49152, 51820, 12001)
_DEFAULT_PORT_PROBS = (0.30, 0.14, 0.05, 0.16, 0.05, 0.03, 0.02, 0.03, 0.02, 0.10, 0.06, 0.04)


@dataclass(frozen=True)
class SyntheticDomainSpec:
    """Parameters of a synthetic surrogate domain.

    Bytes are log-normal(byte_mu, byte_sigma); packets derive from bytes
    via mean_packet_size under multiplicative log-normal noise; durations
    are log-normal over seconds; destination ports follow the categorical
    port mix and protocols a TCP/UDP split.
    """

    domain_id: str = "synthetic"
    n_flows: int = 10_000
    percentile_p: float = 85.0
    byte_mu: float = 6.5
    byte_sigma: float = 1.5
    mean_packet_size: float = 600.0
    packet_noise_sigma: float = 0.35
    ports: tuple[int, ...] = _DEFAULT_PORTS
    port_probs: tuple[float, ...] = _DEFAULT_PORT_PROBS
    tcp_fraction: float = 0.82
    duration_mu: float = 0.0
    duration_sigma: float = 1.2
    seed: int = 42

    def __post_init__(self):
        params = (
            self.byte_mu,
            self.byte_sigma,
            self.mean_packet_size,
            self.packet_noise_sigma,
            self.tcp_fraction,
            self.duration_mu,
            self.duration_sigma,
        )
        if not all(np.isfinite(params)):
            raise SpecError("distribution parameters must be finite")
        if self.n_flows < 0:
            raise SpecError(f"n_flows must be non-negative, got {self.n_flows}")
        if self.byte_sigma <= 0 or self.duration_sigma <= 0:
            raise SpecError("log-normal sigma must be positive")
        if self.packet_noise_sigma < 0:
            raise SpecError("packet_noise_sigma must be non-negative")
        if self.mean_packet_size <= 0:
            raise SpecError("mean_packet_size must be positive")
        if not 0.0 <= self.tcp_fraction <= 1.0:
            raise SpecError(f"tcp_fraction must lie in [0, 1], got {self.tcp_fraction}")
        if len(self.ports) != len(self.port_probs) or not self.ports:
            raise SpecError("ports and port_probs must be equal-length and non-empty")
        if abs(sum(self.port_probs) - 1.0) > 1e-9:
            raise SpecError(f"port_probs sum to {sum(self.port_probs)}, not 1")
        if any(p < 0 for p in self.port_probs):
            raise SpecError("port_probs must be non-negative")


def generate_synthetic_domain(spec: SyntheticDomainSpec) -> DomainDataset:
    """Generate exactly spec.n_flows validated flows, fully seed-determined."""
    n = spec.n_flows
    rng = generator(spec.seed)
    raw_bytes = np.exp(rng.normal(spec.byte_mu, spec.byte_sigma, n))
    total_bytes = np.maximum(np.rint(raw_bytes), 1).astype(np.int64)
    noise = np.exp(rng.normal(0.0, spec.packet_noise_sigma, n)) if spec.packet_noise_sigma else np.ones(n)
    packets = np.maximum(np.rint(raw_bytes / spec.mean_packet_size * noise), 1).astype(np.int64)
    dst_ports = rng.choice(np.array(spec.ports, dtype=np.int64), size=n, p=np.array(spec.port_probs))
    src_ports = rng.integers(1024, 65536, n)
    protocols = np.where(rng.random(n) < spec.tcp_fraction, 6, 17)
    duration_ms = np.rint(np.exp(rng.normal(spec.duration_mu, spec.duration_sigma, n)) * 1000.0).astype(np.int64)
    first_seen = rng.integers(0, 86_400_000, n)
    flows = tuple(
        validate_flow(
            FlowRecord(
                flow_id=f"{spec.domain_id}-{i:06d}",
                src_port=int(src_ports[i]),
                dst_port=int(dst_ports[i]),
                protocol=int(protocols[i]),
                total_bytes=int(total_bytes[i]),
                total_packets=int(packets[i]),
                first_seen_ms=int(first_seen[i]),
                last_seen_ms=int(first_seen[i] + duration_ms[i]),
            )
        )
        for i in range(n)
    )
    return DomainDataset(domain_id=spec.domain_id, flows=flows, percentile_p=spec.percentile_p)


def scaled_spec(base: SyntheticDomainSpec, byte_scale: float, domain_id: str, seed: int) -> SyntheticDomainSpec:
    """Variant of `base` with bytes scaled by `byte_scale` and its own seed."""
    if byte_scale <= 0:
        raise SpecError(f"byte_scale must be positive, got {byte_scale}")
    return replace(base, byte_mu=base.byte_mu + float(np.log(byte_scale)), domain_id=domain_id, seed=seed)


def demo_domain_specs(
    master_seed: int = 42,
    n_flows: int = 10_000,
    scales: Sequence[float] = (1.0, 2.0, 4.0),
) -> list[SyntheticDomainSpec]:
    """Surrogate trio with shifted byte scales, for demos and shift studies."""
    base = SyntheticDomainSpec(n_flows=n_flows)
    specs = []
    for i, scale in enumerate(scales):
        name = f"synth_x{scale:g}"
        specs.append(scaled_spec(base, scale, name, seed=int(master_seed) + i))
    return specs
