"""Soft-margin SVM trained by sequential minimal optimization, one-vs-one.

Each binary subproblem solves the usual dual

    max  sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
    s.t. 0 <= a_i <= C,  sum a_i y_i = 0

with Platt-style working-set selection: examine KKT violators, pick the
partner maximizing |E1 - E2| among non-bound points, then fall back to
seeded-random scans.  The kernel matrix is precomputed (a few hundred rows
here) and a full decision cache is kept so error updates are O(n) per step.
Pairs with non-positive curvature (duplicate points) are skipped.

The RBF kernel's "scale" gamma is 1 / (n_features * var(X)) with the
variance taken over every entry of the full training matrix.
"""

from __future__ import annotations

import numpy as np

from . import ovo
from .base import ModelError, ModelSpec, TrainedModel, indices_to_labels, labels_to_indices


def _pairwise_sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = (A**2).sum(axis=1)[:, None]
    bb = (B**2).sum(axis=1)[None, :]
    return np.maximum(aa + bb - 2.0 * (A @ B.T), 0.0)


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    return np.exp(-gamma * _pairwise_sq_dists(A, B))


class _SmoSolver:
    """One binary soft-margin problem; labels must be +/-1."""

    def __init__(self, K, y, C, tol, max_passes, rng):
        self.K = K
        self.y = y.astype(np.float64)
        self.C = float(C)
        self.tol = float(tol)
        self.max_passes = max_passes
        self.rng = rng
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        # decision cache f_i = sum_j a_j y_j K_ij + b, kept exact incrementally
        self.f = np.full(self.n, self.b)

    def _E(self, i: int) -> float:
        return self.f[i] - self.y[i]

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1_old, a2_old = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        E1, E2 = self._E(i1), self._E(i2)
        s = y1 * y2
        if s < 0:
            L = max(0.0, a2_old - a1_old)
            H = min(self.C, self.C + a2_old - a1_old)
        else:
            L = max(0.0, a2_old + a1_old - self.C)
            H = min(self.C, a2_old + a1_old)
        if L >= H:
            return False
        k11 = self.K[i1, i1]
        k12 = self.K[i1, i2]
        k22 = self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta <= 0.0:
            # duplicate or degenerate pair; no strict progress possible
            return False
        a2 = a2_old + y2 * (E1 - E2) / eta
        a2 = min(max(a2, L), H)
        if abs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12):
            return False
        a1 = a1_old + s * (a2_old - a2)

        d1 = y1 * (a1 - a1_old)
        d2 = y2 * (a2 - a2_old)
        b1 = self.b - E1 - d1 * k11 - d2 * k12
        b2 = self.b - E2 - d1 * k12 - d2 * k22
        if 0.0 < a1 < self.C:
            b_new = b1
        elif 0.0 < a2 < self.C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        self.f += d1 * self.K[i1] + d2 * self.K[i2] + (b_new - self.b)
        self.alpha[i1] = a1
        self.alpha[i2] = a2
        self.b = b_new
        return True

    def _examine(self, i2: int) -> bool:
        y2 = self.y[i2]
        a2 = self.alpha[i2]
        r2 = self._E(i2) * y2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0.0)):
            return False
        non_bound = np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.C))
        if len(non_bound) > 1:
            E2 = self._E(i2)
            errors = self.f[non_bound] - self.y[non_bound]
            i1 = int(non_bound[np.argmax(np.abs(errors - E2))])
            if self._take_step(i1, i2):
                return True
        if len(non_bound):
            start = self.rng.integers(len(non_bound))
            for k in range(len(non_bound)):
                i1 = int(non_bound[(start + k) % len(non_bound)])
                if self._take_step(i1, i2):
                    return True
        start = self.rng.integers(self.n)
        for k in range(self.n):
            i1 = int((start + k) % self.n)
            if self._take_step(i1, i2):
                return True
        return False

    def solve(self) -> tuple[np.ndarray, float]:
        examine_all = True
        num_changed = 1
        passes = 0
        while (num_changed > 0 or examine_all) and passes < self.max_passes:
            passes += 1
            num_changed = 0
            if examine_all:
                candidates = range(self.n)
            else:
                candidates = np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.C))
            for i in candidates:
                if self._examine(int(i)):
                    num_changed += 1
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True
        return self.alpha, self.b


class SvmModel(TrainedModel):
    family = "SVM"

    def __init__(self, spec, machines, gamma, n_features):
        super().__init__(spec, n_features)
        # one dict per class pair: support vectors, dual coefs (a*y), bias
        self._machines = machines
        self.gamma = gamma

    def decision_values(self, X) -> np.ndarray:
        X = self._check_width(X)
        out = np.empty((X.shape[0], len(self._machines)))
        for col, m in enumerate(self._machines):
            K = kernel_matrix(X, m["sv"], self.spec.params.kernel, self.gamma)
            out[:, col] = K @ m["coef"] + m["b"]
        return out

    def predict(self, X) -> np.ndarray:
        return indices_to_labels(ovo.vote_predict_indices(self.decision_values(X)))

    def predict_proba(self, X) -> np.ndarray:
        """Vote-fraction surrogate, not calibrated probabilities."""
        return ovo.vote_proba(self.decision_values(X))

    def payload(self) -> dict:
        return {
            "gamma": self.gamma,
            "machines": [
                {"sv": m["sv"].tolist(), "coef": m["coef"].tolist(), "b": m["b"]}
                for m in self._machines
            ],
        }

    @classmethod
    def from_doc(cls, spec, doc) -> "SvmModel":
        machines = [
            {
                "sv": np.asarray(m["sv"], dtype=np.float64),
                "coef": np.asarray(m["coef"], dtype=np.float64),
                "b": float(m["b"]),
            }
            for m in doc["payload"]["machines"]
        ]
        return cls(spec, machines, float(doc["payload"]["gamma"]), doc["n_features"])


def fit_svm(spec: ModelSpec, X: np.ndarray, y_ints: np.ndarray) -> SvmModel:
    y_idx = labels_to_indices(y_ints)
    params = spec.params
    n, d = X.shape
    variance = float(X.var())
    gamma = 1.0 / (d * variance) if variance > 0 else 1.0
    rng = np.random.default_rng(spec.seed)
    machines = []
    for a, b_cls in ovo.PAIRS:
        mask = (y_idx == a) | (y_idx == b_cls)
        if (y_idx == a).sum() < 2 or (y_idx == b_cls).sum() < 2:
            raise ModelError("one-vs-one needs at least 2 rows of every class")
        Xp = X[mask]
        yp = np.where(y_idx[mask] == a, 1.0, -1.0)
        K = kernel_matrix(Xp, Xp, params.kernel, gamma)
        solver = _SmoSolver(K, yp, params.C, params.tol, params.max_passes, rng)
        alpha, bias = solver.solve()
        support = alpha > 1e-12
        machines.append(
            {
                "sv": Xp[support].copy(),
                "coef": (alpha * yp)[support],
                "b": bias,
            }
        )
    return SvmModel(spec, machines, gamma, d)
