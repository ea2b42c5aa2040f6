"""Statistical tests, survival functions and EDA summaries.

The chi-squared and F survival functions are computed from scratch via the
regularized incomplete gamma and beta functions: a power series is used below
the usual ``x < a + 1`` switchover and a modified-Lentz continued fraction
above it.  Both converge to near machine precision for the degrees of freedom
this toolkit meets.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .dataset import LABEL_ORDER, ClassLabel, Dataset

_EPS = 1e-15
_TINY = 1e-300
_MAX_ITER = 800


class StatsError(ValueError):
    """Raised for degenerate inputs to the statistical routines."""


# ---------------------------------------------------------------------------
# special functions


def _gammainc_lower_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by power series (x < a + 1)."""
    if x == 0.0:
        return 0.0
    term = 1.0 / a
    total = term
    n = a
    for _ in range(_MAX_ITER):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    return total * math.exp(log_prefactor)


def _gammainc_upper_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by continued fraction (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    return h * math.exp(log_prefactor)


def gammainc_upper_reg(a: float, x: float) -> float:
    """Q(a, x), the upper regularized incomplete gamma function."""
    if a <= 0.0:
        raise StatsError(f"gamma shape must be positive, got {a}")
    if x < 0.0:
        raise StatsError(f"gamma argument must be non-negative, got {x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gammainc_lower_series(a, x)
    return _gammainc_upper_cf(a, x)


def chi2_sf(x: float, k: int) -> float:
    """Upper-tail probability of the chi-squared distribution with k dof."""
    if k < 1:
        raise StatsError(f"chi-squared dof must be >= 1, got {k}")
    if x < 0.0:
        raise StatsError(f"chi-squared statistic must be >= 0, got {x}")
    return gammainc_upper_reg(k / 2.0, x / 2.0)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if a <= 0.0 or b <= 0.0:
        raise StatsError(f"beta shapes must be positive, got a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise StatsError(f"beta argument must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the continued fraction converges fastest on the side where
    # x < (a + 1) / (a + b + 2)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(x: float, d1: int, d2: int) -> float:
    """Upper-tail probability of the F distribution with (d1, d2) dof."""
    if d1 < 1 or d2 < 1:
        raise StatsError(f"F dof must be >= 1, got ({d1}, {d2})")
    if x < 0.0:
        raise StatsError(f"F statistic must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return betainc_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))


# ---------------------------------------------------------------------------
# tests


@dataclass(frozen=True)
class TestResult:
    """Outcome of one statistical test.

    ``dof`` is a single integer for chi-squared and a (between, within) pair
    for the F test.  ``flag`` marks edge cases such as zero within-group
    variance.
    """

    statistic: float
    dof: object
    p_value: float
    flag: str | None = None


def chi_squared_from_table(observed) -> TestResult:
    """Classic test of independence on an r x c contingency table."""
    table = np.asarray(observed, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 2:
        raise StatsError("contingency table must be at least 2x2")
    if np.any(table < 0):
        raise StatsError("contingency table entries must be non-negative")
    row_sums = table.sum(axis=1)
    col_sums = table.sum(axis=0)
    total = table.sum()
    if total == 0:
        raise StatsError("contingency table is empty")
    expected = np.outer(row_sums, col_sums) / total
    if np.any(expected == 0.0):
        raise StatsError("degenerate marginal: expected cell count of 0")
    statistic = float(((table - expected) ** 2 / expected).sum())
    dof = (table.shape[0] - 1) * (table.shape[1] - 1)
    return TestResult(statistic=statistic, dof=dof, p_value=chi2_sf(statistic, dof))


def contingency_table(values, labels) -> tuple[np.ndarray, list, list]:
    """Observed-category x observed-class counts, in order of first appearance
    for categories and label order for classes."""
    categories: list = []
    for v in values:
        if v not in categories:
            categories.append(v)
    observed_classes = [lab for lab in LABEL_ORDER if lab in set(labels)]
    cat_idx = {c: i for i, c in enumerate(categories)}
    cls_idx = {c: i for i, c in enumerate(observed_classes)}
    table = np.zeros((len(categories), len(observed_classes)), dtype=np.float64)
    for v, lab in zip(values, labels):
        table[cat_idx[v], cls_idx[lab]] += 1
    return table, categories, observed_classes


def chi_squared_test(values, labels) -> TestResult:
    """Independence test between a categorical column and the class labels."""
    if len(values) != len(labels):
        raise StatsError("values and labels must have equal length")
    table, categories, classes = contingency_table(values, labels)
    if len(categories) < 2:
        raise StatsError("need at least 2 observed categories")
    if len(classes) < 2:
        raise StatsError("need at least 2 observed classes")
    return chi_squared_from_table(table)


def anova_f_test(x, labels) -> TestResult:
    """One-way ANOVA F test of a numeric column against the class labels."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) != len(labels):
        raise StatsError("values and labels must have equal length")
    groups = [x[np.asarray([lab == cls for lab in labels])] for cls in LABEL_ORDER]
    groups = [g for g in groups if len(g) > 0]
    k = len(groups)
    n = sum(len(g) for g in groups)
    if k < 2:
        raise StatsError("need at least 2 classes with observations")
    if not any(len(g) >= 2 for g in groups):
        raise StatsError("need at least one class with 2 observations")
    grand_mean = x.mean()
    ss_between = sum(len(g) * (g.mean() - grand_mean) ** 2 for g in groups)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in groups)
    dof = (k - 1, n - k)
    if ss_within == 0.0 and ss_between == 0.0:
        raise StatsError("degenerate: all observations identical")
    if ss_within == 0.0:
        return TestResult(
            statistic=math.inf, dof=dof, p_value=0.0, flag="zero-within-variance"
        )
    ms_between = ss_between / dof[0]
    ms_within = ss_within / dof[1]
    statistic = ms_between / ms_within
    return TestResult(statistic=statistic, dof=dof, p_value=f_sf(statistic, *dof))


def pearson_corr(x, y) -> float:
    """Product-moment correlation of two numeric columns."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y) or len(x) < 2:
        raise StatsError("need two columns of equal length >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt((xc**2).sum() * (yc**2).sum())
    if denom == 0.0:
        raise StatsError("zero variance column")
    return float((xc * yc).sum() / denom)


# ---------------------------------------------------------------------------
# feature ranking


def rank_features(results: dict[str, TestResult]) -> list[tuple[str, TestResult]]:
    """Sort by ascending p-value, ties broken by descending statistic."""
    return sorted(results.items(), key=lambda item: (item[1].p_value, -item[1].statistic))


def categorical_rankings(ds: Dataset) -> list[tuple[str, TestResult]]:
    """Chi-squared relevance ranking of every categorical feature."""
    results = {
        feat.name: chi_squared_test(ds.column(feat.name), ds.labels)
        for feat in ds.schema.categorical_features()
    }
    return rank_features(results)

def numeric_rankings(ds: Dataset) -> list[tuple[str, TestResult]]:
    """ANOVA-F relevance ranking of every numeric feature."""
    results = {
        feat.name: anova_f_test(ds.column(feat.name), ds.labels)
        for feat in ds.schema.numeric_features()
    }
    return rank_features(results)


def bottom_ranked_categoricals(ds: Dataset, count: int = 4) -> list[str]:
    """Names of the ``count`` least class-associated categoricals."""
    ranking = categorical_rankings(ds)
    return [name for name, _ in ranking[-count:]]


# ---------------------------------------------------------------------------
# EDA


def _skewness(x: np.ndarray) -> float:
    """Fisher-Pearson standardized third moment (population convention)."""
    x = np.asarray(x, dtype=np.float64)
    std = x.std()
    if std == 0.0 or len(x) < 2:
        return 0.0
    return float((((x - x.mean()) / std) ** 3).mean())


@dataclass(frozen=True)
class EdaReport:
    """Plot-ready summaries: histograms, bar counts, scatter data, correlations."""

    n_rows: int
    class_proportions: dict
    histograms: dict
    bar_counts: dict
    scatter: dict
    correlation_features: tuple
    correlation_matrix: list
    grouped_means: dict
    skewness_by_class: dict

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "class_proportions": self.class_proportions,
            "histograms": self.histograms,
            "bar_counts": self.bar_counts,
            "scatter": self.scatter,
            "correlation_features": list(self.correlation_features),
            "correlation_matrix": self.correlation_matrix,
            "grouped_means": self.grouped_means,
            "skewness_by_class": self.skewness_by_class,
        }


HISTOGRAM_BINS = 10
HISTOGRAM_RANGE = (0.0, 100.0)


def eda_report(ds: Dataset, group_by: tuple[str, ...] = ("Topic", "GradeID")) -> EdaReport:
    """Deterministic exploratory summary of a dataset.

    Numeric histograms use 10 equal-width bins over [0, 100]; categorical bar
    counts are reported overall and per class; the Pearson matrix covers the
    numeric features.
    """
    if ds.n_rows == 0:
        raise StatsError("empty dataset")

    from .dataset import class_distribution  # local import avoids cycle at module load

    numerics = ds.schema.numeric_features()
    histograms = {}
    skewness = {}
    for feat in numerics:
        col = np.asarray(ds.column(feat.name), dtype=np.float64)
        counts, edges = np.histogram(col, bins=HISTOGRAM_BINS, range=HISTOGRAM_RANGE)
        histograms[feat.name] = {
            "bin_edges": [float(e) for e in edges],
            "counts": [int(c) for c in counts],
        }
        skewness[feat.name] = {
            label.name: _skewness(col[np.asarray([lab == label for lab in ds.labels])])
            for label in LABEL_ORDER
            if any(lab == label for lab in ds.labels)
        }

    bar_counts = {}
    for feat in ds.schema.categorical_features():
        col = ds.column(feat.name)
        overall = Counter(col)
        per_class: dict[str, dict] = {}
        for label in LABEL_ORDER:
            subset = [v for v, lab in zip(col, ds.labels) if lab == label]
            per_class[label.name] = {cat: int(n) for cat, n in Counter(subset).items()}
        bar_counts[feat.name] = {
            "overall": {cat: int(n) for cat, n in overall.items()},
            "by_class": per_class,
        }

    numeric_names = tuple(f.name for f in numerics)
    columns = {name: np.asarray(ds.column(name), dtype=np.float64) for name in numeric_names}
    scatter = {
        "columns": list(numeric_names),
        "points": [
            [float(columns[name][i]) for name in numeric_names] for i in range(ds.n_rows)
        ],
        "labels": [lab.name for lab in ds.labels],
    }

    corr = [
        [
            1.0 if i == j else pearson_corr(columns[a], columns[b])
            for j, b in enumerate(numeric_names)
        ]
        for i, a in enumerate(numeric_names)
    ]

    grouped_means = {}
    for group_feat in group_by:
        if group_feat not in ds.schema.feature_names:
            continue
        col = ds.column(group_feat)
        groups: dict[str, dict] = {}
        for cat in ds.schema.feature(group_feat).categories:
            mask = np.asarray([v == cat for v in col])
            if not mask.any():
                continue
            groups[cat] = {
                name: float(columns[name][mask].mean()) for name in numeric_names
            }
        grouped_means[group_feat] = groups

    proportions = {
        label.name: p for label, p in class_distribution(ds).items()
    }
    return EdaReport(
        n_rows=ds.n_rows,
        class_proportions=proportions,
        histograms=histograms,
        bar_counts=bar_counts,
        scatter=scatter,
        correlation_features=numeric_names,
        correlation_matrix=corr,
        grouped_means=grouped_means,
        skewness_by_class=skewness,
    )
