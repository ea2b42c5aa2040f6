"""Shared model-family plumbing: parameter records, fit dispatch, serialization.

Every family trains through ``fit(spec, X, y)`` and returns an immutable
``TrainedModel`` whose ``predict``/``predict_proba`` are deterministic.  For
families without calibrated probabilities (k-NN, SVM, DT and the one-vs-one
LR) ``predict_proba`` returns a documented vote- or leaf-frequency surrogate
whose argmax always agrees with ``predict``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..dataset import LABEL_ORDER, ClassLabel

MODEL_FORMAT_VERSION = 1

FAMILIES = ("KNN", "NB", "LR", "SVM", "DT", "MLP")


class ModelError(ValueError):
    """Raised for invalid model parameters or fit/predict misuse."""


@dataclass(frozen=True)
class KnnParams:
    k: int = 15
    p: float = 1.0

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ModelError(f"k must be an odd positive integer, got {self.k}")
        if self.p < 1:
            raise ModelError(f"Minkowski order must be >= 1, got {self.p}")


@dataclass(frozen=True)
class NbParams:
    alpha: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ModelError(f"smoothing alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class LrParams:
    penalty: str = "L2"
    C: float = 0.1
    max_iter: int = 500
    tol: float = 1e-6

    def __post_init__(self):
        if self.penalty not in ("L1", "L2"):
            raise ModelError(f"penalty must be L1 or L2, got {self.penalty!r}")
        if self.C <= 0:
            raise ModelError(f"C must be positive, got {self.C}")


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    kernel: str = "rbf"
    gamma_rule: str = "scale"
    tol: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        if self.C <= 0:
            raise ModelError(f"C must be positive, got {self.C}")
        if self.kernel not in ("rbf", "linear"):
            raise ModelError(f"kernel must be rbf or linear, got {self.kernel!r}")
        if self.gamma_rule != "scale":
            raise ModelError(f"only the 'scale' gamma rule is supported")


@dataclass(frozen=True)
class DtParams:
    criterion: str = "gini"
    splitter: str = "random"
    max_depth: int | None = 6
    min_samples_split: int = 4
    min_samples_leaf: int = 4

    def __post_init__(self):
        if self.criterion not in ("gini", "entropy"):
            raise ModelError(f"criterion must be gini or entropy, got {self.criterion!r}")
        if self.splitter not in ("random", "best"):
            raise ModelError(f"splitter must be random or best, got {self.splitter!r}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ModelError(f"max_depth must be positive or None, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ModelError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ModelError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class MlpParams:
    layers: tuple[int, ...] = (128, 64, 32, 16, 8)
    activation: str = "relu"
    batch_size: int = 100
    learning_rate: float = 1e-4
    max_epochs: int = 200
    tol: float = 1e-4
    patience: int = 10

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers or len(layers) > 5:
            raise ModelError(f"hidden layers must number 1-5, got {layers}")
        if max(layers) > 256 or min(layers) < 1:
            raise ModelError(f"layer widths must lie in 1-256, got {layers}")
        if any(layers[i] < layers[i + 1] for i in range(len(layers) - 1)):
            raise ModelError(f"layers must be pyramid-shaped (non-increasing), got {layers}")
        if self.activation not in ("relu", "tanh"):
            raise ModelError(f"activation must be relu or tanh, got {self.activation!r}")
        if self.batch_size < 1:
            raise ModelError("batch_size must be positive")
        if self.learning_rate <= 0:
            raise ModelError("learning_rate must be positive")


PARAM_TYPES = {
    "KNN": KnnParams,
    "NB": NbParams,
    "LR": LrParams,
    "SVM": SvmParams,
    "DT": DtParams,
    "MLP": MlpParams,
}

#: Hyper-parameter search spaces used for tuning (and the in-grid check).
SEARCH_SPACES = {
    "KNN": {"k": [3, 5, 7, 9, 11, 13, 15, 17, 19], "p": [1, 2, 3, 4, 5]},
    "NB": {"alpha": [1.0, 0.5, 0.1]},
    "LR": {"penalty": ["L1", "L2"], "C": [100.0, 10.0, 1.0, 0.5, 0.1]},
    "SVM": {"C": [100.0, 10.0, 1.0, 0.99, 0.9, 0.4, 0.1]},
    "DT": {
        "criterion": ["gini", "entropy"],
        "splitter": ["random", "best"],
        "max_depth": [None, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20],
        "min_samples_split": [2, 4, 8, 16],
        "min_samples_leaf": [1, 2, 4, 8],
    },
    "MLP": {
        "layers": [
            (64,),
            (128,),
            (256,),
            (128, 64),
            (256, 128),
            (128, 64, 32),
            (256, 128, 64),
            (128, 64, 32, 16),
            (128, 64, 32, 16, 8),
            (256, 128, 64, 32, 16),
        ],
        "activation": ["relu", "tanh"],
        "batch_size": [100, 200],
        "learning_rate": [0.0001, 0.001, 0.1],
    },
}


@dataclass(frozen=True)
class ModelSpec:
    """One classifier family with concrete parameters and a fit seed."""

    family: str
    params: object = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.params is None:
            object.__setattr__(self, "params", PARAM_TYPES[self.family]())
        elif not isinstance(self.params, PARAM_TYPES[self.family]):
            raise ModelError(
                f"{self.family} expects {PARAM_TYPES[self.family].__name__} params"
            )

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=int(seed))

    def in_search_space(self) -> bool:
        """Whether every tunable parameter sits inside the standard grid."""
        space = SEARCH_SPACES[self.family]
        values = asdict(self.params)
        for key, allowed in space.items():
            value = values.get(key)
            if isinstance(value, list):
                value = tuple(value)
            allowed_set = [tuple(a) if isinstance(a, (list, tuple)) else a for a in allowed]
            if value not in allowed_set:
                return False
        return True


class TrainedModel:
    """Immutable fitted classifier.  Subclasses fill in the family specifics."""

    family: str = ""

    def __init__(self, spec: ModelSpec, n_features: int):
        self.spec = spec
        self.n_features = int(n_features)
        self.classes = LABEL_ORDER

    def _check_width(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise ModelError(
                f"input has {X.shape[1]} columns, model trained on {self.n_features}"
            )
        return X

    def predict(self, X) -> np.ndarray:
        """Predicted labels as an int array of {-1, 0, +1}."""
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        """Per-class probability rows (L, M, H), summing to 1."""
        raise NotImplementedError

    def payload(self) -> dict:
        """Family-specific state for serialization."""
        raise NotImplementedError

    def to_doc(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "family": self.family,
            "params": _params_to_doc(self.spec.params),
            "seed": self.spec.seed,
            "n_features": self.n_features,
            "classes": [int(c) for c in self.classes],
            "payload": self.payload(),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_doc(), sort_keys=True), encoding="utf-8")


def _params_to_doc(params) -> dict:
    doc = asdict(params)
    for key, value in doc.items():
        if isinstance(value, tuple):
            doc[key] = list(value)
    return doc


def params_from_doc(family: str, doc: dict):
    cls = PARAM_TYPES[family]
    kwargs = dict(doc)
    if family == "MLP" and "layers" in kwargs:
        kwargs["layers"] = tuple(kwargs["layers"])
    return cls(**kwargs)


def labels_to_ints(y) -> np.ndarray:
    """Normalize a label sequence (ClassLabel or ints) to an int array."""
    return np.asarray([int(v) for v in y], dtype=np.int64)


def labels_to_indices(y_ints: np.ndarray) -> np.ndarray:
    """Map {-1, 0, +1} to positional class indices {0, 1, 2}."""
    lookup = {int(label): i for i, label in enumerate(LABEL_ORDER)}
    try:
        return np.asarray([lookup[int(v)] for v in y_ints], dtype=np.int64)
    except KeyError as exc:
        raise ModelError(f"unknown label value {exc}") from None


def indices_to_labels(idx: np.ndarray) -> np.ndarray:
    values = np.asarray([int(label) for label in LABEL_ORDER], dtype=np.int64)
    return values[np.asarray(idx, dtype=np.int64)]


def check_fit_inputs(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X.values if hasattr(X, "values") else X, dtype=np.float64)
    if X.ndim != 2:
        raise ModelError("training matrix must be 2-D")
    y_ints = labels_to_ints(y)
    if X.shape[0] != len(y_ints):
        raise ModelError(f"{X.shape[0]} rows but {len(y_ints)} labels")
    if not np.all(np.isfinite(X)):
        raise ModelError("training matrix contains non-finite values")
    return X, y_ints


def fit(spec: ModelSpec, X, y) -> TrainedModel:
    """Train one model.  ``X`` may be a DesignMatrix or a plain array."""
    from . import knn, mlp, naive_bayes, svm, tree
    from . import logistic

    trainers = {
        "KNN": knn.fit_knn,
        "NB": naive_bayes.fit_nb,
        "LR": logistic.fit_lr,
        "SVM": svm.fit_svm,
        "DT": tree.fit_dt,
        "MLP": mlp.fit_mlp,
    }
    Xv, y_ints = check_fit_inputs(X, y)
    return trainers[spec.family](spec, Xv, y_ints)


def load_model(path) -> TrainedModel:
    """Reload a model document written by ``TrainedModel.save``."""
    from . import knn, mlp, naive_bayes, svm, tree
    from . import logistic

    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelError(
            f"unsupported model document version {doc.get('format_version')!r}"
        )
    family = doc["family"]
    spec = ModelSpec(
        family=family,
        params=params_from_doc(family, doc["params"]),
        seed=doc["seed"],
    )
    loaders = {
        "KNN": knn.KnnModel.from_doc,
        "NB": naive_bayes.NbModel.from_doc,
        "LR": logistic.LrModel.from_doc,
        "SVM": svm.SvmModel.from_doc,
        "DT": tree.DtModel.from_doc,
        "MLP": mlp.MlpModel.from_doc,
    }
    return loaders[family](spec, doc)
