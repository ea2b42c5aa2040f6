"""CART-style decision tree with gini/entropy impurity and two splitters.

``best`` scans every feature and every boundary between distinct sorted
values (threshold = midpoint), vectorized with cumulative class counts.
``random`` draws one uniform threshold per feature between the node's min
and max and keeps the best-scoring feature, the conventional reading of a
randomized splitter.  Splits must leave ``min_samples_leaf`` rows on each
side; a node with no valid candidate becomes a leaf.

Ties are deterministic: equal-impurity splits prefer the lower feature
index, then the lower threshold; leaf majorities break ties in label order.
"""

from __future__ import annotations

import numpy as np

from .base import ModelError, ModelSpec, TrainedModel, indices_to_labels, labels_to_indices


def _impurity_from_counts(counts: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity per row of a (m, 3) class-count array."""
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
    if criterion == "gini":
        return 1.0 - (p**2).sum(axis=-1)
    logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logp).sum(axis=-1)


def _best_cut_for_feature(x, y_idx, criterion, min_leaf):
    """Best (weighted_impurity, threshold) along one feature, or None."""
    n = len(x)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y_idx[order]
    onehot = np.zeros((n, 3))
    onehot[np.arange(n), ys] = 1.0
    left_cum = np.cumsum(onehot, axis=0)
    total = left_cum[-1]

    sizes = np.arange(1, n)  # left side size s -> cut after sorted position s-1
    boundary = xs[1:] != xs[:-1]
    valid = boundary & (sizes >= min_leaf) & ((n - sizes) >= min_leaf)
    if not valid.any():
        return None
    left_counts = left_cum[:-1][valid]
    right_counts = total[None, :] - left_counts
    s = sizes[valid].astype(np.float64)
    weighted = (
        s * _impurity_from_counts(left_counts, criterion)
        + (n - s) * _impurity_from_counts(right_counts, criterion)
    ) / n
    best = int(np.argmin(weighted))  # first minimum -> lowest threshold
    cut_pos = np.flatnonzero(valid)[best]
    threshold = 0.5 * (xs[cut_pos] + xs[cut_pos + 1])
    return float(weighted[best]), float(threshold)


def _random_cut_for_feature(x, y_idx, criterion, min_leaf, threshold):
    n = len(x)
    left_mask = x <= threshold
    n_left = int(left_mask.sum())
    if n_left < min_leaf or (n - n_left) < min_leaf:
        return None
    left_counts = np.bincount(y_idx[left_mask], minlength=3).astype(np.float64)
    right_counts = np.bincount(y_idx[~left_mask], minlength=3).astype(np.float64)
    weighted = (
        n_left * _impurity_from_counts(left_counts[None, :], criterion)[0]
        + (n - n_left) * _impurity_from_counts(right_counts[None, :], criterion)[0]
    ) / n
    return float(weighted), float(threshold)


def _grow(X, y_idx, idx, depth, params, rng):
    counts = np.bincount(y_idx[idx], minlength=3).astype(int)
    node = {"counts": counts.tolist()}
    n = len(idx)
    pure = int((counts > 0).sum()) <= 1
    depth_stop = params.max_depth is not None and depth >= params.max_depth
    if pure or depth_stop or n < params.min_samples_split:
        return node

    best = None  # (weighted, feature, threshold)
    for j in range(X.shape[1]):
        x = X[idx, j]
        if params.splitter == "best":
            cut = _best_cut_for_feature(x, y_idx[idx], params.criterion, params.min_samples_leaf)
        else:
            lo, hi = float(x.min()), float(x.max())
            draw = float(rng.uniform(lo, hi))  # drawn for every feature to keep the stream stable
            if lo == hi:
                continue
            cut = _random_cut_for_feature(
                x, y_idx[idx], params.criterion, params.min_samples_leaf, draw
            )
        if cut is None:
            continue
        weighted, threshold = cut
        if best is None or weighted < best[0]:
            best = (weighted, j, threshold)
    if best is None:
        return node

    _, feature, threshold = best
    left_mask = X[idx, feature] <= threshold
    node["feature"] = int(feature)
    node["threshold"] = float(threshold)
    node["left"] = _grow(X, y_idx, idx[left_mask], depth + 1, params, rng)
    node["right"] = _grow(X, y_idx, idx[~left_mask], depth + 1, params, rng)
    return node


class DtModel(TrainedModel):
    family = "DT"

    def __init__(self, spec, root, n_features):
        super().__init__(spec, n_features)
        self._root = root

    def _leaf_counts(self, X) -> np.ndarray:
        X = self._check_width(X)
        out = np.empty((X.shape[0], 3))
        rows = np.arange(X.shape[0])
        stack = [(self._root, rows)]
        while stack:
            node, members = stack.pop()
            if not len(members):
                continue
            if "feature" not in node:
                out[members] = np.asarray(node["counts"], dtype=np.float64)
                continue
            go_left = X[members, node["feature"]] <= node["threshold"]
            stack.append((node["left"], members[go_left]))
            stack.append((node["right"], members[~go_left]))
        return out

    def predict(self, X) -> np.ndarray:
        return indices_to_labels(np.argmax(self._leaf_counts(X), axis=1))

    def predict_proba(self, X) -> np.ndarray:
        """Leaf class-frequency surrogate."""
        counts = self._leaf_counts(X)
        return counts / counts.sum(axis=1, keepdims=True)

    def payload(self) -> dict:
        return {"root": self._root}

    @classmethod
    def from_doc(cls, spec, doc) -> "DtModel":
        return cls(spec, doc["payload"]["root"], doc["n_features"])


def fit_dt(spec: ModelSpec, X: np.ndarray, y_ints: np.ndarray) -> DtModel:
    if X.shape[0] < 1:
        raise ModelError("decision tree needs at least one training row")
    y_idx = labels_to_indices(y_ints)
    rng = np.random.default_rng(spec.seed)
    root = _grow(X, y_idx, np.arange(X.shape[0]), 0, spec.params, rng)
    return DtModel(spec, root, X.shape[1])
