"""One-vs-one logistic regression trained by proximal gradient descent.

Each binary subproblem minimizes

    J(w, b) = sum_i log(1 + exp(-y_i (w.x_i + b))) + penalty(w)

with penalty ||w||^2 / (2C) for L2 (handled in the gradient) or ||w||_1 / C
for L1 (handled by soft-thresholding after each gradient step).  The bias is
never penalized.  Backtracking on the step size makes the descent monotone,
so the solver is deterministic and needs no tuning.
"""

from __future__ import annotations

import numpy as np

from . import ovo
from .base import ModelError, ModelSpec, TrainedModel, indices_to_labels, labels_to_indices


def _log_loss(margins: np.ndarray) -> float:
    # log(1 + exp(-m)) computed stably for large |m|
    return float(np.logaddexp(0.0, -margins).sum())


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _soft_threshold(w: np.ndarray, thresh: float) -> np.ndarray:
    return np.sign(w) * np.maximum(np.abs(w) - thresh, 0.0)


def train_binary_logistic(
    X: np.ndarray,
    y: np.ndarray,
    penalty: str,
    C: float,
    max_iter: int = 500,
    tol: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """Fit one binary problem (y in {-1, +1}); returns (weights, bias)."""
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    step = 1.0
    l2 = 1.0 / C if penalty == "L2" else 0.0
    l1 = 1.0 / C if penalty == "L1" else 0.0

    def objective(w, b):
        margins = y * (X @ w + b)
        obj = _log_loss(margins) + 0.5 * l2 * float(w @ w)
        if l1:
            obj += l1 * float(np.abs(w).sum())
        return obj

    current = objective(w, b)
    for _ in range(max_iter):
        margins = y * (X @ w + b)
        residual = -y * _sigmoid(-margins)
        grad_w = X.T @ residual + l2 * w
        grad_b = float(residual.sum())

        # backtracking line search on the smooth part; L1 enters through the
        # proximal step, with sufficient decrease checked on the full objective
        improved = False
        while step > 1e-12:
            w_new = w - step * grad_w
            if l1:
                w_new = _soft_threshold(w_new, step * l1)
            b_new = b - step * grad_b
            candidate = objective(w_new, b_new)
            move = float(((w_new - w) ** 2).sum() + (b_new - b) ** 2)
            if candidate <= current - 1e-4 * move / max(step, 1e-12):
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        delta = current - candidate
        w, b, current = w_new, b_new, candidate
        step = min(step * 2.0, 1e6)
        if delta < tol * max(1.0, abs(current)):
            break
    return w, b


class LrModel(TrainedModel):
    family = "LR"

    def __init__(self, spec, weights, biases, n_features):
        super().__init__(spec, n_features)
        self._weights = weights  # (3, d), one row per class pair
        self._biases = biases

    def decision_values(self, X) -> np.ndarray:
        """Pairwise decision values, positive favoring each pair's first class."""
        X = self._check_width(X)
        return X @ self._weights.T + self._biases[None, :]

    def predict(self, X) -> np.ndarray:
        return indices_to_labels(ovo.vote_predict_indices(self.decision_values(X)))

    def predict_proba(self, X) -> np.ndarray:
        """Pair-vote probability surrogate (see ovo.vote_proba)."""
        return ovo.vote_proba(self.decision_values(X))

    def payload(self) -> dict:
        return {"weights": self._weights.tolist(), "biases": self._biases.tolist()}

    @classmethod
    def from_doc(cls, spec, doc) -> "LrModel":
        weights = np.asarray(doc["payload"]["weights"], dtype=np.float64)
        return cls(
            spec,
            weights,
            np.asarray(doc["payload"]["biases"], dtype=np.float64),
            weights.shape[1],
        )


def fit_lr(spec: ModelSpec, X: np.ndarray, y_ints: np.ndarray) -> LrModel:
    y_idx = labels_to_indices(y_ints)
    params = spec.params
    n, d = X.shape
    weights = np.zeros((3, d))
    biases = np.zeros(3)
    for col, (a, b) in enumerate(ovo.PAIRS):
        mask = (y_idx == a) | (y_idx == b)
        if (y_idx == a).sum() < 2 or (y_idx == b).sum() < 2:
            raise ModelError("one-vs-one needs at least 2 rows of every class")
        y_bin = np.where(y_idx[mask] == a, 1.0, -1.0)
        weights[col], biases[col] = train_binary_logistic(
            X[mask], y_bin, params.penalty, params.C, params.max_iter, params.tol
        )
    return LrModel(spec, weights, biases, d)
