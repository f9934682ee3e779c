"""Decision tree and random forest classifiers, plus KNN and Gaussian-NB
baselines.

Trees split greedily on midpoints between consecutive distinct sorted
feature values, maximizing the weighted impurity decrease
imp(parent) - (wL*imp(L) + wR*imp(R)) / w(parent); ties break toward the
lower feature index, then the lower threshold. Class weights (balanced =
n / (2 * n_c)) enter both the impurity computation and leaf distributions.
Vote ties resolve to class 1, favoring elephant recall.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput, SchemaMismatch, SingleClass
from .flow import LabeledMatrix
from .rng import derive_seed, generator

GINI = "gini"
ENTROPY = "entropy"

MODEL_FORMAT_VERSION = 1

_KNN_BLOCK = 256
_NB_VAR_FLOOR = 1e-9


@dataclass(frozen=True)
class TreeParams:
    criterion: str = GINI
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    class_weight: Optional[str] = None  # None | "balanced"

    def __post_init__(self):
        if self.criterion not in (GINI, ENTROPY):
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be at least 1, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be at least 1, got {self.min_samples_leaf}")
        if self.class_weight not in (None, "balanced"):
            raise ValueError(f"unknown class_weight {self.class_weight!r}")


# Tuned single-tree preset (entropy, depth 10, 10-sample leaves).
TUNED_TREE = TreeParams(criterion=ENTROPY, max_depth=10, min_samples_leaf=10)


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    tree: TreeParams = field(default_factory=lambda: TreeParams(class_weight="balanced"))
    max_features: str = "sqrt"  # "sqrt" | "all"
    bootstrap: bool = True
    seed: int = 42

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be at least 1, got {self.n_estimators}")
        if self.max_features not in ("sqrt", "all"):
            raise ValueError(f"unknown max_features {self.max_features!r}")


def unified_forest_params(seed: int = 42, n_estimators: int = 200, max_depth: int = 20) -> ForestParams:
    """Forest configuration used for combined-corpus training."""
    return ForestParams(
        n_estimators=n_estimators,
        tree=TreeParams(max_depth=max_depth, class_weight="balanced"),
        seed=seed,
    )


def balanced_class_weights(y: np.ndarray) -> np.ndarray:
    """Per-class weights w_c = n / (2 * n_c)."""
    y = np.asarray(y, dtype=np.int64)
    counts = np.bincount(y, minlength=2)
    if counts[0] == 0 or counts[1] == 0:
        raise SingleClass("balanced weights need both classes present")
    return len(y) / (2.0 * counts.astype(np.float64))


def node_impurity(w0, w1, criterion: str):
    """Gini or base-2 entropy of a node with weighted class masses w0, w1."""
    total = w0 + w1
    p0 = w0 / total
    p1 = w1 / total
    if criterion == GINI:
        return 1.0 - (p0 * p0 + p1 * p1)
    return -(_xlog2(p0) + _xlog2(p1))


def _xlog2(p):
    p = np.asarray(p, dtype=np.float64)
    safe = np.where(p > 0.0, p, 1.0)
    return np.where(p > 0.0, p * np.log2(safe), 0.0)


@dataclass(frozen=True)
class TreeModel:
    """Array-of-nodes binary tree; feature < 0 marks a leaf.

    `dist` holds each node's class-weighted label mass; `decrease` holds
    the impurity decrease of internal splits as a share of the root mass,
    which feature importances accumulate.
    """

    params: TreeParams
    schema: tuple[str, ...]
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    decrease: np.ndarray
    dist: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        for name in ("feature", "threshold", "left", "right", "decrease", "dist"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feats = self.feature[node]
            rows = np.flatnonzero(feats >= 0)
            if rows.size == 0:
                return node
            current = node[rows]
            go_left = X[rows, self.feature[current]] <= self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])

    def predict(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        leaf_dist = self.dist[self.apply(rows)]
        return (leaf_dist[:, 1] >= leaf_dist[:, 0]).astype(np.int64)

    def predict_proba(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.float64)
        leaf_dist = self.dist[self.apply(rows)]
        return leaf_dist[:, 1] / leaf_dist.sum(axis=1)


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeModel, ...]
    params: ForestParams
    schema: tuple[str, ...]
    tree_seeds: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "tree_seeds", tuple(int(s) for s in self.tree_seeds))
        if len(self.trees) != self.params.n_estimators:
            raise ValueError(
                f"{len(self.trees)} trees for n_estimators={self.params.n_estimators}"
            )

    def predict_proba(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.float64)
        votes = np.zeros(rows.shape[0], dtype=np.float64)
        for tree in self.trees:
            votes += tree.predict(rows)
        return votes / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)  # tie -> elephant


def _matrix_rows(schema: tuple[str, ...], X) -> np.ndarray:
    if isinstance(X, LabeledMatrix):
        if tuple(X.schema) != tuple(schema):
            raise SchemaMismatch(f"model schema {schema} != matrix schema {X.schema}")
        return X.rows
    rows = np.asarray(X, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != len(schema):
        raise SchemaMismatch(
            f"model expects {len(schema)} features, got array of shape {rows.shape}"
        )
    return rows


def _default_schema(n_features: int) -> tuple[str, ...]:
    return tuple(f"f{i}" for i in range(n_features))


class _TreeBuilder:
    """Grows one tree; collects nodes in preorder."""

    def __init__(self, X, y, weights, params, max_features, rng):
        self.X = X
        self.y = y
        self.w = weights
        self.params = params
        self.rng = rng
        n_features = X.shape[1]
        if max_features == "sqrt":
            self.n_candidates = math.isqrt(n_features)
            if self.n_candidates * self.n_candidates < n_features:
                self.n_candidates += 1
        else:
            self.n_candidates = n_features
        self.n_features = n_features
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.decrease: list[float] = []
        self.dist: list[tuple[float, float]] = []
        self.root_mass = float(weights.sum())

    def build(self) -> int:
        return self._grow(np.arange(len(self.y)), depth=0)

    def _add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(float("nan"))
        self.left.append(-1)
        self.right.append(-1)
        self.decrease.append(0.0)
        self.dist.append((0.0, 0.0))
        return len(self.feature) - 1

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        node = self._add_node()
        yn = self.y[idx]
        wn = self.w[idx]
        w1n = wn * yn
        w1 = float(np.sum(w1n))
        w0 = float(np.sum(wn)) - w1
        self.dist[node] = (w0, w1)
        params = self.params
        n = len(idx)
        pure = (yn[0] == yn).all()
        if (
            pure
            or (params.max_depth is not None and depth >= params.max_depth)
            or n < 2 * params.min_samples_leaf
        ):
            return node
        Xn = self.X[idx]
        split = self._best_split(Xn, wn, w1n, w0, w1)
        if split is None:
            return node
        feature, threshold, delta = split
        go_left = Xn[:, feature] <= threshold
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.decrease[node] = (w0 + w1) / self.root_mass * delta
        self.left[node] = self._grow(idx[go_left], depth + 1)
        self.right[node] = self._grow(idx[~go_left], depth + 1)
        return node

    def _candidate_features(self) -> np.ndarray:
        if self.n_candidates >= self.n_features:
            return np.arange(self.n_features)
        chosen = self.rng.choice(self.n_features, size=self.n_candidates, replace=False)
        return np.sort(chosen)  # scan order keeps the lower-index tie rule

    def _best_split(self, Xn: np.ndarray, wn: np.ndarray, w1n: np.ndarray, w0: float, w1: float):
        """Best (feature, threshold, impurity decrease) over the candidate
        features, all evaluated in one batch; ties resolve to the lowest
        feature index, then the lowest threshold."""
        params = self.params
        criterion = params.criterion
        parent_impurity = float(node_impurity(w0, w1, criterion))
        w_total = w0 + w1
        n = len(wn)
        msl = params.min_samples_leaf
        feats = self._candidate_features()
        values = Xn[:, feats]
        order = np.argsort(values, axis=0, kind="stable")
        vs = np.take_along_axis(values, order, axis=0)
        cum_w = np.cumsum(wn[order], axis=0)
        cum_w1 = np.cumsum(w1n[order], axis=0)
        n_left = np.arange(1, n)
        ok_counts = (n_left >= msl) & (n - n_left >= msl)
        valid = (vs[:-1] < vs[1:]) & ok_counts[:, None]
        if not valid.any():
            return None
        wl = cum_w[:-1]
        wl1 = cum_w1[:-1]
        wl0 = wl - wl1
        wr = w_total - wl
        wr1 = w1 - wl1
        wr0 = wr - wr1
        child_impurity = (
            wl * node_impurity(wl0, wl1, criterion)
            + wr * node_impurity(wr0, wr1, criterion)
        ) / w_total
        deltas = parent_impurity - child_impurity
        deltas[~valid] = -np.inf
        flat = int(np.argmax(deltas.T.ravel()))  # feature-major scan: first max
        column, boundary = divmod(flat, n - 1)
        delta = float(deltas[boundary, column])
        if not delta > 0.0:
            return None
        threshold = float((vs[boundary, column] + vs[boundary + 1, column]) / 2.0)
        return int(feats[column]), threshold, delta


def _sample_weights(y: np.ndarray, class_weight: Optional[str]) -> np.ndarray:
    if class_weight == "balanced":
        return balanced_class_weights(y)[y]
    return np.ones(len(y), dtype=np.float64)


def train_decision_tree(
    X,
    y: np.ndarray,
    params: TreeParams = TreeParams(),
    schema: Optional[Sequence[str]] = None,
) -> TreeModel:
    """Fit one tree on the full feature set (no row or feature sampling)."""
    rows, schema = _training_matrix(X, schema)
    y = np.asarray(y, dtype=np.int64)
    if rows.shape[0] == 0:
        raise EmptyInput("cannot train a tree on zero rows")
    if len(y) != rows.shape[0]:
        raise ValueError(f"{len(y)} labels for {rows.shape[0]} rows")
    weights = _sample_weights(y, params.class_weight)
    return _fit_tree(rows, y, weights, params, "all", rng=None, schema=schema)


def _training_matrix(X, schema):
    if isinstance(X, LabeledMatrix):
        return X.rows, tuple(X.schema)
    rows = np.asarray(X, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[:, None]
    if schema is None:
        schema = _default_schema(rows.shape[1])
    elif len(schema) != rows.shape[1]:
        raise SchemaMismatch(f"schema of {len(schema)} names for {rows.shape[1]} columns")
    return rows, tuple(schema)


def _fit_tree(rows, y, weights, params, max_features, rng, schema) -> TreeModel:
    if rng is None:
        rng = generator(0)  # unused when max_features == "all"
    builder = _TreeBuilder(rows, y, weights, params, max_features, rng)
    builder.build()
    return TreeModel(
        params=params,
        schema=schema,
        feature=np.array(builder.feature, dtype=np.int64),
        threshold=np.array(builder.threshold, dtype=np.float64),
        left=np.array(builder.left, dtype=np.int64),
        right=np.array(builder.right, dtype=np.int64),
        decrease=np.array(builder.decrease, dtype=np.float64),
        dist=np.array(builder.dist, dtype=np.float64),
    )


def train_random_forest(
    X,
    y: np.ndarray,
    params: ForestParams = ForestParams(),
    schema: Optional[Sequence[str]] = None,
    n_jobs: int = 1,
) -> ForestModel:
    """Fit a forest of seeded trees on bootstrap row samples.

    Each tree's seed derives from (params.seed, tree index), so the model
    is identical for any worker count.
    """
    rows, schema = _training_matrix(X, schema)
    y = np.asarray(y, dtype=np.int64)
    if rows.shape[0] == 0:
        raise EmptyInput("cannot train a forest on zero rows")
    if len(y) != rows.shape[0]:
        raise ValueError(f"{len(y)} labels for {rows.shape[0]} rows")
    weights = _sample_weights(y, params.tree.class_weight)
    tree_seeds = tuple(derive_seed(params.seed, "tree", t) for t in range(params.n_estimators))

    def fit_one(seed: int) -> TreeModel:
        rng = generator(seed)
        if params.bootstrap:
            chosen = rng.integers(0, rows.shape[0], rows.shape[0])
            return _fit_tree(
                rows[chosen], y[chosen], weights[chosen], params.tree,
                params.max_features, rng, schema,
            )
        return _fit_tree(rows, y, weights, params.tree, params.max_features, rng, schema)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = tuple(pool.map(fit_one, tree_seeds))
    else:
        trees = tuple(fit_one(seed) for seed in tree_seeds)
    return ForestModel(trees=trees, params=params, schema=schema, tree_seeds=tree_seeds)


def predict(model, X) -> np.ndarray:
    """Class labels from any trained model."""
    return model.predict(X)


def predict_proba(model, X) -> np.ndarray:
    """P(elephant) per row from any trained model."""
    return model.predict_proba(X)


def feature_importances(model) -> np.ndarray:
    """Mean-decrease-in-impurity importances over the model schema.

    Each tree's split decreases are summed per feature and normalized to
    sum 1; a forest averages the per-tree vectors and renormalizes. A model
    with no splits anywhere yields the zero vector.
    """
    if isinstance(model, TreeModel):
        return _tree_importances(model)
    total = np.zeros(len(model.schema), dtype=np.float64)
    for tree in model.trees:
        total += _tree_importances(tree)
    s = total.sum()
    return total / s if s > 0 else total


def _tree_importances(tree: TreeModel) -> np.ndarray:
    sums = np.zeros(len(tree.schema), dtype=np.float64)
    internal = tree.feature >= 0
    np.add.at(sums, tree.feature[internal], tree.decrease[internal])
    s = sums.sum()
    return sums / s if s > 0 else sums


@dataclass(frozen=True)
class KNNModel:
    """k-nearest-neighbor voter over stored (already scaled) training rows."""

    k: int
    schema: tuple[str, ...]
    train_rows: np.ndarray
    train_labels: np.ndarray

    def _votes(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        k = min(self.k, len(self.train_labels))
        votes = np.zeros(rows.shape[0], dtype=np.float64)
        for start in range(0, rows.shape[0], _KNN_BLOCK):
            stop = min(start + _KNN_BLOCK, rows.shape[0])
            block = rows[start:stop]
            sq = (
                np.sum(block * block, axis=1)[:, None]
                + np.sum(self.train_rows * self.train_rows, axis=1)[None, :]
                - 2.0 * block @ self.train_rows.T
            )
            order = np.argsort(sq, axis=1, kind="stable")[:, :k]
            votes[start:stop] = self.train_labels[order].sum(axis=1)
        return votes

    def predict(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        k = min(self.k, len(self.train_labels))
        votes = self._votes(X)
        return (2 * votes >= k).astype(np.int64)  # tie -> elephant

    def predict_proba(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.float64)
        k = min(self.k, len(self.train_labels))
        return self._votes(X) / k


@dataclass(frozen=True)
class GaussianNBModel:
    """Per-class, per-feature Gaussian likelihoods with a variance floor."""

    schema: tuple[str, ...]
    log_prior: np.ndarray  # (2,), -inf for an absent class
    mean: np.ndarray  # (2, F)
    var: np.ndarray  # (2, F)

    def _joint_log_likelihood(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        joint = np.empty((rows.shape[0], 2), dtype=np.float64)
        for c in (0, 1):
            if not np.isfinite(self.log_prior[c]):
                joint[:, c] = -np.inf
                continue
            log_lik = -0.5 * (
                np.log(2.0 * np.pi * self.var[c])
                + (rows - self.mean[c]) ** 2 / self.var[c]
            ).sum(axis=1)
            joint[:, c] = self.log_prior[c] + log_lik
        return joint

    def predict(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        joint = self._joint_log_likelihood(X)
        return (joint[:, 1] >= joint[:, 0]).astype(np.int64)

    def predict_proba(self, X) -> np.ndarray:
        rows = _matrix_rows(self.schema, X)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.float64)
        joint = self._joint_log_likelihood(X)
        top = joint.max(axis=1, keepdims=True)
        shifted = np.where(np.isfinite(joint), joint - top, -np.inf)
        expd = np.exp(shifted)
        return expd[:, 1] / expd.sum(axis=1)


KNN = "knn"
GAUSSIAN_NB = "gaussian_nb"


def train_baseline(kind: str, X, y: np.ndarray, schema: Optional[Sequence[str]] = None, k: int = 5):
    """Fit a lightweight baseline: `knn` (expects scaled rows) or `gaussian_nb`."""
    rows, schema = _training_matrix(X, schema)
    y = np.asarray(y, dtype=np.int64)
    if rows.shape[0] == 0:
        raise EmptyInput("cannot train a baseline on zero rows")
    if len(y) != rows.shape[0]:
        raise ValueError(f"{len(y)} labels for {rows.shape[0]} rows")
    if kind == KNN:
        stored = rows.copy()
        stored.setflags(write=False)
        labels = y.copy()
        labels.setflags(write=False)
        return KNNModel(k=k, schema=schema, train_rows=stored, train_labels=labels)
    if kind == GAUSSIAN_NB:
        n_features = rows.shape[1]
        log_prior = np.full(2, -np.inf)
        mean = np.zeros((2, n_features))
        var = np.ones((2, n_features))
        for c in (0, 1):
            members = rows[y == c]
            if members.shape[0] == 0:
                continue
            log_prior[c] = np.log(members.shape[0] / rows.shape[0])
            mean[c] = members.mean(axis=0)
            var[c] = np.maximum(members.var(axis=0), _NB_VAR_FLOOR)
        return GaussianNBModel(schema=schema, log_prior=log_prior, mean=mean, var=var)
    raise ValueError(f"unknown baseline kind {kind!r}")


@dataclass(frozen=True)
class ModelSpec:
    """Which classifier to train, with its parameters."""

    kind: str = "forest"  # forest | tree | knn | gaussian_nb
    forest: ForestParams = field(default_factory=ForestParams)
    tree: TreeParams = field(default_factory=TreeParams)
    knn_k: int = 5

    def __post_init__(self):
        if self.kind not in ("forest", "tree", KNN, GAUSSIAN_NB):
            raise ValueError(f"unknown model kind {self.kind!r}")


def train_model(
    X,
    y: np.ndarray,
    spec: ModelSpec,
    schema: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    n_jobs: int = 1,
):
    """Train the model described by `spec`; `seed` overrides the forest seed."""
    if spec.kind == "forest":
        params = spec.forest if seed is None else replace(spec.forest, seed=seed)
        return train_random_forest(X, y, params, schema=schema, n_jobs=n_jobs)
    if spec.kind == "tree":
        return train_decision_tree(X, y, spec.tree, schema=schema)
    return train_baseline(spec.kind, X, y, schema=schema, k=spec.knn_k)


def tree_to_doc(tree: TreeModel) -> dict:
    return {
        "params": {
            "criterion": tree.params.criterion,
            "max_depth": tree.params.max_depth,
            "min_samples_leaf": tree.params.min_samples_leaf,
            "class_weight": tree.params.class_weight,
        },
        "feature": tree.feature.tolist(),
        "threshold": [None if math.isnan(t) else t for t in tree.threshold.tolist()],
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "decrease": tree.decrease.tolist(),
        "dist": tree.dist.tolist(),
    }


def tree_from_doc(doc: dict, schema: Sequence[str]) -> TreeModel:
    params = TreeParams(**doc["params"])
    threshold = np.array(
        [float("nan") if t is None else t for t in doc["threshold"]], dtype=np.float64
    )
    return TreeModel(
        params=params,
        schema=tuple(schema),
        feature=np.array(doc["feature"], dtype=np.int64),
        threshold=threshold,
        left=np.array(doc["left"], dtype=np.int64),
        right=np.array(doc["right"], dtype=np.int64),
        decrease=np.array(doc["decrease"], dtype=np.float64),
        dist=np.array(doc["dist"], dtype=np.float64),
    )


def model_to_doc(model) -> dict:
    """Versioned JSON document for a tree or forest; reload is bit-exact."""
    if isinstance(model, TreeModel):
        doc = tree_to_doc(model)
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": "tree",
            "schema": list(model.schema),
            "tree": doc,
        }
    if isinstance(model, ForestModel):
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": "forest",
            "schema": list(model.schema),
            "params": {
                "n_estimators": model.params.n_estimators,
                "max_features": model.params.max_features,
                "bootstrap": model.params.bootstrap,
                "seed": model.params.seed,
                "tree": {
                    "criterion": model.params.tree.criterion,
                    "max_depth": model.params.tree.max_depth,
                    "min_samples_leaf": model.params.tree.min_samples_leaf,
                    "class_weight": model.params.tree.class_weight,
                },
            },
            "tree_seeds": list(model.tree_seeds),
            "trees": [tree_to_doc(t) for t in model.trees],
        }
    raise TypeError(f"cannot serialize model of type {type(model).__name__}")


def model_from_doc(doc: dict):
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    schema = tuple(doc["schema"])
    if doc["kind"] == "tree":
        return tree_from_doc(doc["tree"], schema)
    if doc["kind"] == "forest":
        p = doc["params"]
        params = ForestParams(
            n_estimators=p["n_estimators"],
            tree=TreeParams(**p["tree"]),
            max_features=p["max_features"],
            bootstrap=p["bootstrap"],
            seed=p["seed"],
        )
        trees = tuple(tree_from_doc(t, schema) for t in doc["trees"])
        return ForestModel(trees=trees, params=params, schema=schema, tree_seeds=tuple(doc["tree_seeds"]))
    raise ValueError(f"unknown model kind {doc['kind']!r}")


def save_model(model, path: str | Path, meta: Optional[dict] = None) -> None:
    doc = model_to_doc(model)
    if meta:
        doc = {**meta, **doc}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path: str | Path):
    doc = json.loads(Path(path).read_text())
    return model_from_doc(doc)
