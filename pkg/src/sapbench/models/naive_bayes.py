"""Multinomial naive Bayes with Laplace/Lidstone smoothing.

Consumes the raw (unstandardized, non-negative) design matrix: one-hot
indicators and activity counts are treated as event counts.
"""

from __future__ import annotations

import numpy as np

from .base import ModelError, ModelSpec, TrainedModel, indices_to_labels, labels_to_indices


class NbModel(TrainedModel):
    family = "NB"

    def __init__(self, spec, log_prior, log_prob, n_features):
        super().__init__(spec, n_features)
        self._log_prior = log_prior
        self._log_prob = log_prob  # (3, d)

    def _joint_log_likelihood(self, X) -> np.ndarray:
        X = self._check_width(X)
        if np.any(X < 0):
            raise ModelError("multinomial NB requires non-negative features")
        return self._log_prior[None, :] + X @ self._log_prob.T

    def predict(self, X) -> np.ndarray:
        return indices_to_labels(np.argmax(self._joint_log_likelihood(X), axis=1))

    def predict_proba(self, X) -> np.ndarray:
        jll = self._joint_log_likelihood(X)
        shifted = jll - jll.max(axis=1, keepdims=True)
        probs = np.exp(shifted)
        return probs / probs.sum(axis=1, keepdims=True)

    def payload(self) -> dict:
        return {
            "log_prior": self._log_prior.tolist(),
            "log_prob": self._log_prob.tolist(),
        }

    @classmethod
    def from_doc(cls, spec, doc) -> "NbModel":
        log_prob = np.asarray(doc["payload"]["log_prob"], dtype=np.float64)
        return cls(
            spec,
            np.asarray(doc["payload"]["log_prior"], dtype=np.float64),
            log_prob,
            log_prob.shape[1],
        )


def fit_nb(spec: ModelSpec, X: np.ndarray, y_ints: np.ndarray) -> NbModel:
    if np.any(X < 0):
        raise ModelError("multinomial NB requires non-negative features")
    y_idx = labels_to_indices(y_ints)
    class_counts = np.bincount(y_idx, minlength=3)
    if np.any(class_counts == 0):
        raise ModelError("every class must appear in the training data")
    alpha = spec.params.alpha
    n, d = X.shape
    log_prior = np.log(class_counts / n)
    feature_counts = np.zeros((3, d))
    for c in range(3):
        feature_counts[c] = X[y_idx == c].sum(axis=0)
    smoothed = feature_counts + alpha
    totals = smoothed.sum(axis=1, keepdims=True)
    # alpha=0 with an unseen feature would give log(0); clamp so that absent
    # features contribute nothing and present ones a finite huge penalty
    log_prob = np.log(np.maximum(smoothed, 1e-300)) - np.log(np.maximum(totals, 1e-300))
    return NbModel(spec, log_prior, log_prob, d)
