"""Robust scaling, SMOTE / Tomek-link resampling, stratified folds.

Nearest-neighbor searches use squared Euclidean distance with ties broken
by lower row index, computed in row blocks so memory stays bounded. All
randomized steps are bit-reproducible from their seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import (
    EmptyInput,
    InsufficientMinority,
    SchemaMismatch,
    SingleClass,
    TooFewSamples,
)
from .flow import LabeledMatrix
from .rng import generator

_NN_BLOCK = 512


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature median and interquartile range (linear-interpolation
    quartiles); a zero IQR scales with divisor 1."""

    schema: tuple[str, ...]
    median: np.ndarray
    iqr: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        median = np.asarray(self.median, dtype=np.float64)
        iqr = np.asarray(self.iqr, dtype=np.float64)
        if median.shape != (len(self.schema),) or iqr.shape != (len(self.schema),):
            raise ValueError("median/iqr must have one entry per schema feature")
        if np.any(iqr < 0):
            raise ValueError("iqr entries must be non-negative")
        median.setflags(write=False)
        iqr.setflags(write=False)
        object.__setattr__(self, "median", median)
        object.__setattr__(self, "iqr", iqr)


def fit_scaler(m: LabeledMatrix) -> ScalerParams:
    """Fit per-feature median and IQR on a non-empty matrix."""
    if m.n_rows == 0:
        raise EmptyInput("cannot fit a scaler on an empty matrix")
    q1, median, q3 = np.percentile(m.rows, (25.0, 50.0, 75.0), axis=0)
    return ScalerParams(schema=m.schema, median=median, iqr=q3 - q1)


def apply_scaler(params: ScalerParams, m: LabeledMatrix) -> LabeledMatrix:
    """Apply (x - median) / iqr per feature; constant features pass through
    centered."""
    if tuple(m.schema) != params.schema:
        raise SchemaMismatch(
            f"scaler was fit on {len(params.schema)} features, matrix has schema {m.schema}"
        )
    divisor = np.where(params.iqr == 0, 1.0, params.iqr)
    return LabeledMatrix(schema=m.schema, rows=(m.rows - params.median) / divisor, labels=m.labels)


def _block_sq_dists(block: np.ndarray, X: np.ndarray) -> np.ndarray:
    sq = np.sum(block * block, axis=1)[:, None] + np.sum(X * X, axis=1)[None, :]
    sq -= 2.0 * block @ X.T
    return np.maximum(sq, 0.0)


def nearest_neighbor_indices(X: np.ndarray) -> np.ndarray:
    """Index of each row's nearest other row (ties -> lower index)."""
    n = X.shape[0]
    if n < 2:
        raise EmptyInput("nearest-neighbor search needs at least two rows")
    out = np.empty(n, dtype=np.int64)
    for start in range(0, n, _NN_BLOCK):
        stop = min(start + _NN_BLOCK, n)
        dists = _block_sq_dists(X[start:stop], X)
        dists[np.arange(start, stop) - start, np.arange(start, stop)] = np.inf
        out[start:stop] = np.argmin(dists, axis=1)  # first minimum = lowest index
    return out


def _k_nearest_within(X: np.ndarray, k: int) -> np.ndarray:
    """Per row, indices of its k nearest other rows in X (stable tie order)."""
    n = X.shape[0]
    neighbors = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _NN_BLOCK):
        stop = min(start + _NN_BLOCK, n)
        dists = _block_sq_dists(X[start:stop], X)
        dists[np.arange(start, stop) - start, np.arange(start, stop)] = np.inf
        order = np.argsort(dists, axis=1, kind="stable")
        neighbors[start:stop] = order[:, :k]
    return neighbors


def smote(
    X: np.ndarray,
    y: np.ndarray,
    k_neighbors: int = 5,
    target_count: Optional[int] = None,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Oversample the minority class to exactly `target_count` rows.

    Synthetic rows interpolate between a minority sample and one of its k
    nearest minority neighbors: x_new = x_i + u * (x_nn - x_i), u ~ U[0,1].
    Original rows are preserved verbatim at the front of the output.
    `target_count` defaults to the majority count (full balance).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    counts = np.bincount(y, minlength=2)
    minority = int(np.argmin(counts))
    if counts[minority] < 2:
        raise InsufficientMinority(
            f"minority class {minority} has {counts[minority]} samples, need at least 2"
        )
    if k_neighbors < 1:
        raise ValueError(f"k_neighbors must be at least 1, got {k_neighbors}")
    if target_count is None:
        target_count = int(counts[1 - minority])
    if target_count < counts[minority]:
        raise ValueError(
            f"target_count {target_count} below current minority count {counts[minority]}"
        )
    n_new = target_count - int(counts[minority])
    if n_new == 0:
        return X.copy(), y.copy()
    minority_idx = np.flatnonzero(y == minority)
    Xm = X[minority_idx]
    k = min(k_neighbors, len(minority_idx) - 1)
    neighbors = _k_nearest_within(Xm, k)
    rng = generator(seed)
    base = rng.integers(0, len(minority_idx), n_new)
    pick = rng.integers(0, k, n_new)
    u = rng.random(n_new)
    anchors = Xm[base]
    partners = Xm[neighbors[base, pick]]
    synthetic = anchors + u[:, None] * (partners - anchors)
    X_out = np.vstack([X, synthetic])
    y_out = np.concatenate([y, np.full(n_new, minority, dtype=np.int64)])
    return X_out, y_out


def tomek_links(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices to remove: the majority-class member of every Tomek link.

    A pair is a link iff the two rows carry opposite labels and each is the
    other's single nearest neighbor. Majority = the globally larger class;
    on a global tie the label-0 member is removed.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    counts = np.bincount(y, minlength=2)
    if counts[0] == 0 or counts[1] == 0:
        raise SingleClass("tomek links need both classes present")
    nn = nearest_neighbor_indices(X)
    majority = 0 if counts[0] >= counts[1] else 1
    remove: list[int] = []
    for i in range(len(y)):
        j = nn[i]
        if i < j and nn[j] == i and y[i] != y[j]:
            remove.append(i if y[i] == majority else int(j))
    return np.array(sorted(remove), dtype=np.int64)


def smote_tomek(
    X: np.ndarray,
    y: np.ndarray,
    k_neighbors: int = 5,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """SMOTE to exact class balance, then drop Tomek-link majority members."""
    Xb, yb = smote(X, y, k_neighbors=k_neighbors, seed=seed)
    counts = np.bincount(yb, minlength=2)
    if counts[0] == 0 or counts[1] == 0:
        return Xb, yb
    removal = tomek_links(Xb, yb)
    if removal.size == 0:
        return Xb, yb
    keep = np.ones(len(yb), dtype=bool)
    keep[removal] = False
    return Xb[keep], yb[keep]


@dataclass(frozen=True)
class FoldPlan:
    """Stratified fold assignment: per-sample fold index in [0, k)."""

    k: int
    assignments: np.ndarray

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        assignments = np.asarray(self.assignments, dtype=np.int64)
        if assignments.ndim != 1:
            raise ValueError("assignments must be one-dimensional")
        if assignments.size and (assignments.min() < 0 or assignments.max() >= self.k):
            raise ValueError("fold indices must lie in [0, k)")
        assignments.setflags(write=False)
        object.__setattr__(self, "assignments", assignments)

    def iter_folds(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield (train_indices, test_indices) per fold, in fold order."""
        for fold in range(self.k):
            test = np.flatnonzero(self.assignments == fold)
            train = np.flatnonzero(self.assignments != fold)
            yield train, test


def stratified_kfold(y: np.ndarray, k: int, seed: int) -> FoldPlan:
    """Deal each class round-robin into k folds after a seeded shuffle.

    The dealing position carries over between classes so total fold sizes
    differ by at most one; per-class fold counts differ by at most one from
    perfect stratification by construction.
    """
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    rng = generator(seed)
    assignments = np.empty(len(y), dtype=np.int64)
    start = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if len(idx) < k:
            raise TooFewSamples(int(cls), len(idx), k)
        shuffled = idx[rng.permutation(len(idx))]
        assignments[shuffled] = (start + np.arange(len(idx))) % k
        start = (start + len(idx)) % k
    return FoldPlan(k=k, assignments=assignments)
