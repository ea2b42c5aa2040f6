"""Loading, validation and description of SAPData-format CSV files.

A dataset is a collection of raw per-feature records plus a three-level
performance label (L / M / H).  The feature layout (names, kinds, category
vocabularies, feature groups) comes from a schema file so that nothing about
the data is hard-coded here.
"""

from __future__ import annotations

import csv
import json
import sys
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

FEATURE_KINDS = ("nominal", "ordinal", "numeric")
FEATURE_GROUPS = ("demographic", "academic", "behavioral", "parental")


class DatasetError(ValueError):
    """Raised for schema violations, malformed files and bad cell values."""


class ClassLabel(IntEnum):
    """Three-level performance label, encoded L=-1, M=0, H=+1."""

    L = -1
    M = 0
    H = 1

    @classmethod
    def from_string(cls, value: str) -> "ClassLabel":
        try:
            return cls[value]
        except KeyError:
            raise DatasetError(
                f"unknown class label {value!r}; expected one of L, M, H"
            ) from None


#: Labels in ascending order, used everywhere an ordering or tie-break is needed.
LABEL_ORDER = (ClassLabel.L, ClassLabel.M, ClassLabel.H)


@dataclass(frozen=True)
class FeatureSpec:
    """One feature: its name, kind, category vocabulary and feature group.

    Ordinal features list their categories in rank order; numeric features
    carry an empty category tuple.
    """

    name: str
    kind: str
    categories: tuple[str, ...] = ()
    group: str = "academic"

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise DatasetError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.group not in FEATURE_GROUPS:
            raise DatasetError(f"feature {self.name!r}: unknown group {self.group!r}")
        if self.kind == "numeric":
            if self.categories:
                raise DatasetError(
                    f"feature {self.name!r}: numeric features take no categories"
                )
        else:
            if not self.categories:
                raise DatasetError(
                    f"feature {self.name!r}: categorical features need categories"
                )
            if len(set(self.categories)) != len(self.categories):
                raise DatasetError(f"feature {self.name!r}: duplicate categories")

    @property
    def is_numeric(self) -> bool:
        return self.kind == "numeric"


@dataclass(frozen=True)
class Schema:
    """Ordered feature list plus the name of the target column."""

    features: tuple[FeatureSpec, ...]
    target_name: str = "Class"

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise DatasetError("duplicate feature names in schema")
        if self.target_name in names:
            raise DatasetError("target column may not also be a feature")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise DatasetError(f"schema has no feature named {name!r}")

    def numeric_features(self) -> tuple[FeatureSpec, ...]:
        return tuple(f for f in self.features if f.is_numeric)

    def categorical_features(self) -> tuple[FeatureSpec, ...]:
        return tuple(f for f in self.features if not f.is_numeric)

    def require_sapdata_layout(self) -> None:
        """Enforce the SAPData shape: 16 features, 4 behavioral numerics, 1 ordinal.

        The library itself works with any schema (toy fixtures in particular);
        the benchmark pipeline calls this before trusting a schema file.
        """
        if len(self.features) != 16:
            raise DatasetError(f"expected 16 features, schema has {len(self.features)}")
        numerics = [f.name for f in self.features if f.is_numeric]
        if len(numerics) != 4:
            raise DatasetError(f"expected 4 numeric features, found {numerics}")
        ordinals = [f.name for f in self.features if f.kind == "ordinal"]
        if len(ordinals) != 1:
            raise DatasetError(f"expected exactly 1 ordinal feature, found {ordinals}")


@dataclass(frozen=True)
class Dataset:
    """Validated rows plus labels; immutable once constructed."""

    schema: Schema
    rows: tuple[dict, ...]
    labels: tuple[ClassLabel, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.labels):
            raise DatasetError(
                f"{len(self.rows)} rows but {len(self.labels)} labels"
            )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        """Raw values of one feature, in row order."""
        self.schema.feature(name)  # raises for unknown names
        return [row[name] for row in self.rows]

    def to_csv(self, path) -> None:
        """Write back out in the same CSV layout load_csv accepts."""
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.schema.feature_names) + [self.schema.target_name])
            for row, label in zip(self.rows, self.labels):
                out = []
                for feat in self.schema.features:
                    value = row[feat.name]
                    if feat.is_numeric:
                        out.append(_format_number(value))
                    else:
                        out.append(value)
                out.append(label.name)
                writer.writerow(out)


def _format_number(value: float) -> str:
    if float(value) == int(value):
        return str(int(value))
    return repr(float(value))


def load_schema(path) -> Schema:
    """Read a schema file (JSON or TOML, chosen by extension)."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"schema file not found: {path}")
    if path.suffix.lower() == ".toml":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    else:
        with path.open("r", encoding="utf-8") as fh:
            doc = json.load(fh)
    try:
        features = tuple(
            FeatureSpec(
                name=entry["name"],
                kind=entry["kind"],
                categories=tuple(entry.get("categories", ())),
                group=entry.get("group", "academic"),
            )
            for entry in doc["features"]
        )
        return Schema(features=features, target_name=doc.get("target", "Class"))
    except KeyError as exc:
        raise DatasetError(f"schema file {path} is missing key {exc}") from None


def load_csv(path, schema: Schema) -> Dataset:
    """Load and validate a SAPData-format CSV against ``schema``.

    Every cell is checked: categorical values must belong to the feature's
    vocabulary and numeric cells must parse to finite numbers.  Errors name
    the offending data row (1-based) and column.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    with path.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        expected = set(schema.feature_names) | {schema.target_name}
        missing = expected - set(header)
        if missing:
            raise DatasetError(f"{path}: missing column(s) {sorted(missing)}")
        extra = set(header) - expected
        if extra:
            raise DatasetError(f"{path}: unexpected column(s) {sorted(extra)}")
        col_index = {name: header.index(name) for name in header}

        rows: list[dict] = []
        labels: list[ClassLabel] = []
        for row_num, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise DatasetError(
                    f"{path}: row {row_num} has {len(record)} cells, expected {len(header)}"
                )
            row: dict = {}
            for feat in schema.features:
                raw = record[col_index[feat.name]].strip()
                if feat.is_numeric:
                    try:
                        value = float(raw)
                    except ValueError:
                        raise DatasetError(
                            f"{path}: row {row_num}, column {feat.name!r}: "
                            f"non-numeric value {raw!r}"
                        ) from None
                    if value != value or value in (float("inf"), float("-inf")):
                        raise DatasetError(
                            f"{path}: row {row_num}, column {feat.name!r}: "
                            f"non-finite value {raw!r}"
                        )
                    row[feat.name] = value
                else:
                    if raw not in feat.categories:
                        raise DatasetError(
                            f"{path}: row {row_num}, column {feat.name!r}: "
                            f"unknown category {raw!r}"
                        )
                    row[feat.name] = raw
            raw_label = record[col_index[schema.target_name]].strip()
            try:
                labels.append(ClassLabel.from_string(raw_label))
            except DatasetError:
                raise DatasetError(
                    f"{path}: row {row_num}, column {schema.target_name!r}: "
                    f"unknown class label {raw_label!r}"
                ) from None
            rows.append(row)

    if not rows:
        raise DatasetError(f"{path}: empty dataset (header only)")
    return Dataset(schema=schema, rows=tuple(rows), labels=tuple(labels))


def discretize_mark(mark: int) -> ClassLabel:
    """Map a raw 0-100 mark to its performance level.

    Marks below 70 are Low, 70-89 Middle, and 90 or above High.  Provided for
    raw-marks inputs; the shipped data already carries discretized labels.
    """
    if not isinstance(mark, (int,)) or isinstance(mark, bool):
        raise DatasetError(f"mark must be an integer, got {mark!r}")
    if mark < 0 or mark > 100:
        raise DatasetError(f"mark {mark} out of range 0-100")
    if mark < 70:
        return ClassLabel.L
    if mark < 90:
        return ClassLabel.M
    return ClassLabel.H


def class_distribution(ds: Dataset) -> dict[ClassLabel, float]:
    """Proportion of rows per class label (all three labels always present)."""
    if ds.n_rows == 0:
        raise DatasetError("empty dataset")
    counts = Counter(ds.labels)
    return {label: counts.get(label, 0) / ds.n_rows for label in LABEL_ORDER}


def class_counts(ds: Dataset) -> dict[ClassLabel, int]:
    """Absolute row count per class label."""
    counts = Counter(ds.labels)
    return {label: counts.get(label, 0) for label in LABEL_ORDER}


def default_schema_path() -> Path:
    """Path of the schema file shipped with the package."""
    return Path(__file__).parent / "data" / "sapdata_schema.json"


def bundled_dataset_path() -> Path:
    """Path of the CSV shipped with the package for tests and demos."""
    return Path(__file__).parent / "data" / "sapdata_synthetic.csv"
