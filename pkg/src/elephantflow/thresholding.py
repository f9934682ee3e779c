"""Per-domain elephant thresholds and flow labeling.

The percentile estimator is the linear-interpolation one: for sorted bytes
x and rank h = (n-1)*p/100, the threshold is
x[floor(h)] + (h - floor(h)) * (x[floor(h)+1] - x[floor(h)]).
The alternative baseline is mean + 3 * population standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput
from .flow import DomainDataset

PERCENTILE = "percentile"
CHEBYSHEV = "chebyshev"

# Default labeling percentiles for the known domains; custom domains must
# supply their own.
DEFAULT_PERCENTILES = {"campus": 85.0, "unsw": 90.0, "cic": 88.0}


def default_percentile(domain_id: str) -> Optional[float]:
    return DEFAULT_PERCENTILES.get(domain_id)


@dataclass(frozen=True)
class ThresholdSpec:
    """Threshold method: percentile(p) with p in (0, 100), or chebyshev."""

    method: str = PERCENTILE
    percentile: Optional[float] = None

    def __post_init__(self):
        if self.method not in (PERCENTILE, CHEBYSHEV):
            raise ValueError(f"unknown threshold method {self.method!r}")
        if self.method == PERCENTILE:
            if self.percentile is None:
                raise ValueError("percentile method requires a percentile value")
            if not 0.0 < self.percentile < 100.0:
                raise ValueError(f"percentile must lie in (0, 100), got {self.percentile}")


@dataclass(frozen=True)
class DomainStats:
    """Summary of one thresholded domain."""

    domain_id: str
    total_flows: int
    threshold_bytes: float
    elephant_ratio: float
    method: str

    def as_dict(self) -> dict:
        return {
            "domain": self.domain_id,
            "total_flows": self.total_flows,
            "threshold_bytes": self.threshold_bytes,
            "elephant_ratio": self.elephant_ratio,
            "method": self.method,
        }


def compute_threshold(byte_values: Sequence[float] | np.ndarray, spec: ThresholdSpec) -> float:
    """Threshold over a domain's byte distribution under `spec`."""
    values = np.asarray(byte_values, dtype=np.float64)
    if values.size == 0:
        raise EmptyInput("cannot compute a threshold over zero byte values")
    if not np.all(np.isfinite(values)):
        raise ValueError("byte values must be finite")
    if spec.method == PERCENTILE:
        return float(np.percentile(values, spec.percentile))
    return float(values.mean() + 3.0 * values.std())


def label_flows(ds: DomainDataset, threshold: float, method: str = "manual") -> tuple[np.ndarray, DomainStats]:
    """Label flows against `threshold`: 1 iff total_bytes strictly exceeds it.

    Returns the label vector and exact domain stats. The dataset itself is
    immutable; attach the result with `ds.with_labels(labels, threshold)`.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    byte_values = ds.byte_values()
    labels = (byte_values > threshold).astype(np.int64)
    total = len(ds)
    ratio = float(labels.sum() / total) if total else 0.0
    stats = DomainStats(
        domain_id=ds.domain_id,
        total_flows=total,
        threshold_bytes=float(threshold),
        elephant_ratio=ratio,
        method=method,
    )
    return labels, stats


def apply_threshold(ds: DomainDataset, spec: Optional[ThresholdSpec] = None) -> tuple[DomainDataset, DomainStats]:
    """Compute the domain threshold, label every flow, return the labeled dataset.

    Without an explicit spec the dataset's own percentile is used.
    """
    if spec is None:
        spec = ThresholdSpec(PERCENTILE, ds.percentile_p)
    threshold = compute_threshold(ds.byte_values(), spec)
    labels, stats = label_flows(ds, threshold, method=_describe(spec))
    return ds.with_labels(labels, threshold), stats


def _describe(spec: ThresholdSpec) -> str:
    if spec.method == PERCENTILE:
        return f"percentile({spec.percentile:g})"
    return "chebyshev(mean+3*std)"
