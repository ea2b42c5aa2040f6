"""k-nearest-neighbour classifier with Minkowski distances.

Distance ties are broken by lower training-row index (stable sort); vote
ties by the larger training-class frequency, then by label order L < M < H.
"""

from __future__ import annotations

import numpy as np

from .base import ModelError, ModelSpec, TrainedModel, indices_to_labels, labels_to_indices


def _minkowski(A: np.ndarray, B: np.ndarray, p: float) -> np.ndarray:
    """Pairwise distances between rows of A (m, d) and B (n, d)."""
    diff = np.abs(A[:, None, :] - B[None, :, :])
    if p == 1:
        return diff.sum(axis=2)
    if p == 2:
        return np.sqrt((diff**2).sum(axis=2))
    return (diff**p).sum(axis=2) ** (1.0 / p)


class KnnModel(TrainedModel):
    family = "KNN"

    def __init__(self, spec, X, y_idx):
        super().__init__(spec, X.shape[1])
        self._X = X
        self._y_idx = y_idx
        self._class_counts = np.bincount(y_idx, minlength=3)

    def _vote_counts(self, X) -> np.ndarray:
        X = self._check_width(X)
        k = self.spec.params.k
        dist = _minkowski(X, self._X, self.spec.params.p)
        # stable sort keeps ties in training-row order
        order = np.argsort(dist, axis=1, kind="stable")[:, :k]
        neighbour_classes = self._y_idx[order]
        counts = np.zeros((X.shape[0], 3))
        for c in range(3):
            counts[:, c] = (neighbour_classes == c).sum(axis=1)
        return counts

    def predict(self, X) -> np.ndarray:
        counts = self._vote_counts(X)
        # vote ties -> larger training frequency -> label order (argmax is
        # first-index on exact ties); both perturbations stay below one vote
        freq = self._class_counts / max(1, self._class_counts.sum())
        return indices_to_labels(np.argmax(counts + 0.4 * freq, axis=1))

    def predict_proba(self, X) -> np.ndarray:
        counts = self._vote_counts(X)
        freq = self._class_counts / max(1, self._class_counts.sum())
        raw = counts + 1e-6 * freq
        return raw / raw.sum(axis=1, keepdims=True)

    def payload(self) -> dict:
        return {
            "X": self._X.tolist(),
            "y_idx": self._y_idx.tolist(),
        }

    @classmethod
    def from_doc(cls, spec, doc) -> "KnnModel":
        return cls(
            spec,
            np.asarray(doc["payload"]["X"], dtype=np.float64),
            np.asarray(doc["payload"]["y_idx"], dtype=np.int64),
        )


def fit_knn(spec: ModelSpec, X: np.ndarray, y_ints: np.ndarray) -> KnnModel:
    if X.shape[0] < spec.params.k:
        raise ModelError(
            f"k-NN needs at least k={spec.params.k} training rows, got {X.shape[0]}"
        )
    return KnnModel(spec, X.copy(), labels_to_indices(y_ints))
