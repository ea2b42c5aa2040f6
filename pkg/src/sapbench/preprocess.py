"""Design-matrix construction: feature protocols, encodings, standardization.

Encoding layout is deterministic: features appear in schema order, one-hot
columns in the feature's category order.  The single ordinal feature is
label-encoded to one column; numerics pass through unchanged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset, DatasetError, FeatureSpec, Schema

PROTOCOL_NAMES = ("SF", "WBF", "WOBF")

#: Categorical features the selected-features protocol removes.
SF_DROPPED_FEATURES = ("SectionID", "StageID", "GradeID", "Semester")


class PreprocessError(ValueError):
    """Raised for protocol/encoding misuse."""


@dataclass(frozen=True)
class FeatureProtocol:
    """A named feature subset used to build a design matrix."""

    name: str
    included_features: tuple[str, ...]

    @classmethod
    def from_name(cls, name: str, schema: Schema) -> "FeatureProtocol":
        """Build one of the three standard protocols against ``schema``.

        WBF keeps every feature, WOBF drops the numeric behavioral counts,
        and SF additionally drops the four low-ranked categoricals.
        """
        all_names = schema.feature_names
        if name == "WBF":
            included = all_names
        elif name == "WOBF":
            numerics = {f.name for f in schema.numeric_features()}
            included = tuple(n for n in all_names if n not in numerics)
        elif name == "SF":
            included = tuple(n for n in all_names if n not in SF_DROPPED_FEATURES)
        else:
            raise PreprocessError(
                f"unknown protocol {name!r}; expected one of {PROTOCOL_NAMES}"
            )
        return cls(name=name, included_features=included)


@dataclass(frozen=True)
class DesignMatrix:
    """Encoded row-major matrix with per-column provenance.

    ``column_origins[j]`` names the schema feature column ``j`` came from,
    which is what lets explanation summaries collapse one-hot groups.
    """

    values: np.ndarray
    column_names: tuple[str, ...]
    column_origins: tuple[str, ...]

    def __post_init__(self):
        if self.values.ndim != 2:
            raise PreprocessError("design matrix must be 2-D")
        if self.values.shape[1] != len(self.column_names):
            raise PreprocessError("column_names length does not match matrix width")
        if len(self.column_names) != len(self.column_origins):
            raise PreprocessError("column_origins length does not match column_names")
        if not np.all(np.isfinite(self.values)):
            raise PreprocessError("design matrix contains non-finite entries")
        self.values.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def take_rows(self, indices) -> "DesignMatrix":
        return DesignMatrix(
            values=self.values[np.asarray(indices, dtype=int)].copy(),
            column_names=self.column_names,
            column_origins=self.column_origins,
        )

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_names)
            for row in self.values:
                writer.writerow([repr(float(v)) for v in row])


def one_hot_encode(feature: FeatureSpec, column) -> np.ndarray:
    """Encode a nominal column as one indicator column per category."""
    if feature.kind != "nominal":
        raise PreprocessError(
            f"one_hot_encode expects a nominal feature, got {feature.kind!r} "
            f"for {feature.name!r}"
        )
    index = {cat: i for i, cat in enumerate(feature.categories)}
    out = np.zeros((len(column), len(feature.categories)), dtype=np.float64)
    for row, value in enumerate(column):
        try:
            out[row, index[value]] = 1.0
        except KeyError:
            raise PreprocessError(
                f"feature {feature.name!r}, row {row}: unknown value {value!r}"
            ) from None
    return out


def label_encode(feature: FeatureSpec, column) -> np.ndarray:
    """Encode a categorical column as category indices (ordinal rank order)."""
    if feature.is_numeric:
        raise PreprocessError(
            f"label_encode expects a categorical feature, got numeric {feature.name!r}"
        )
    index = {cat: i for i, cat in enumerate(feature.categories)}
    out = np.empty(len(column), dtype=np.float64)
    for row, value in enumerate(column):
        try:
            out[row] = index[value]
        except KeyError:
            raise PreprocessError(
                f"feature {feature.name!r}, row {row}: unknown value {value!r}"
            ) from None
    return out


def build_design_matrix(ds: Dataset, proto: FeatureProtocol) -> DesignMatrix:
    """Encode the dataset's rows under a feature protocol.

    Numerics become single pass-through columns, ordinals a single
    label-encoded column, and nominals a one-hot block.
    """
    included = set(proto.included_features)
    unknown = included - set(ds.schema.feature_names)
    if unknown:
        raise PreprocessError(f"protocol references unknown features {sorted(unknown)}")

    blocks: list[np.ndarray] = []
    names: list[str] = []
    origins: list[str] = []
    for feat in ds.schema.features:
        if feat.name not in included:
            continue
        column = ds.column(feat.name)
        if feat.is_numeric:
            blocks.append(np.asarray(column, dtype=np.float64).reshape(-1, 1))
            names.append(feat.name)
            origins.append(feat.name)
        elif feat.kind == "ordinal":
            blocks.append(label_encode(feat, column).reshape(-1, 1))
            names.append(feat.name)
            origins.append(feat.name)
        else:
            blocks.append(one_hot_encode(feat, column))
            names.extend(f"{feat.name}={cat}" for cat in feat.categories)
            origins.extend(feat.name for _ in feat.categories)
    if not blocks:
        raise PreprocessError("protocol selects no features")
    return DesignMatrix(
        values=np.hstack(blocks),
        column_names=tuple(names),
        column_origins=tuple(origins),
    )


@dataclass(frozen=True)
class Standardizer:
    """Per-column centering/scaling statistics, always fitted on training rows.

    Uses the population convention (divide by n) so that re-applying to the
    fitting matrix gives exactly unit standard deviation.  Zero-variance
    columns are centered but not scaled.
    """

    mean: np.ndarray
    stddev: np.ndarray

    def __post_init__(self):
        self.mean.setflags(write=False)
        self.stddev.setflags(write=False)


def fit_standardizer(train: DesignMatrix | np.ndarray) -> Standardizer:
    """Record per-column mean and population stddev of the training rows."""
    values = train.values if isinstance(train, DesignMatrix) else np.asarray(train)
    if values.shape[0] < 2:
        raise PreprocessError("standardizer needs at least 2 training rows")
    mean = values.mean(axis=0)
    stddev = values.std(axis=0)  # ddof=0, population convention
    return Standardizer(mean=mean, stddev=stddev)


def apply_standardizer(s: Standardizer, m: DesignMatrix | np.ndarray):
    """Transform x to (x - mean) / stddev; zero-stddev columns center only.

    Returns the same container kind it was given (DesignMatrix in,
    DesignMatrix out).
    """
    is_matrix = isinstance(m, DesignMatrix)
    values = m.values if is_matrix else np.asarray(m, dtype=np.float64)
    if values.shape[1] != s.mean.shape[0]:
        raise PreprocessError(
            f"column count mismatch: matrix has {values.shape[1]}, "
            f"standardizer has {s.mean.shape[0]}"
        )
    scale = np.where(s.stddev > 0.0, s.stddev, 1.0)
    transformed = (values - s.mean) / scale
    if not is_matrix:
        return transformed
    return DesignMatrix(
        values=transformed,
        column_names=m.column_names,
        column_origins=m.column_origins,
    )
