"""Labeled transaction tables: CSV ingestion and a synthetic generator.

The synthetic generator stands in for a real card-payment portfolio.  It
plants two kinds of class signal into otherwise-noise columns:

* *single* informative features, whose class-conditional means differ;
* informative feature *pairs*, which influence the label only through
  the product ``x_i * x_j`` (each member is marginally uninformative).

Labels are assigned by ranking a latent score, so the generated class
counts are exact rather than binomial.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import rng_from_seed

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# Fixed coefficients of the latent fraud score (documented, not tunable:
# cfg.noise_sd is the single knob for label noise).
_SINGLE_WEIGHT = 1.0
_PAIR_WEIGHT = 1.5
_N_CATEGORIES = 5


class CsvParseError(ValueError):
    """A data row could not be parsed; the message names the line."""


class SchemaError(ValueError):
    """The column-role schema does not match the file."""


@dataclass
class FeatureRow:
    """One transaction's feature values, aligned with ``feature_names``."""

    values: list

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class Dataset:
    """A labeled transaction table.

    ``labels`` are 0 (genuine) / 1 (fraud).  ``amounts`` are non-negative
    transaction values, ``timestamps`` monotone-orderable floats.  All
    four row-aligned lists have equal length.
    """

    feature_names: list[str]
    feature_kinds: list[str]
    rows: list[FeatureRow]
    labels: list[int]
    amounts: list[float]
    timestamps: list[float]

    def __post_init__(self) -> None:
        n = len(self.rows)
        if not (len(self.labels) == len(self.amounts) == len(self.timestamps) == n):
            raise ValueError("rows, labels, amounts and timestamps must have equal length")
        if len(self.feature_names) != len(set(self.feature_names)):
            raise ValueError("feature_names must be unique")
        if len(self.feature_kinds) != len(self.feature_names):
            raise ValueError("feature_kinds must align with feature_names")
        for kind in self.feature_kinds:
            if kind not in (NUMERIC, CATEGORICAL):
                raise ValueError(f"unknown feature kind {kind!r}")
        for label in self.labels:
            if label not in (0, 1):
                raise ValueError(f"labels must be 0 or 1, got {label!r}")
        for amount in self.amounts:
            if amount < 0:
                raise ValueError(f"amounts must be non-negative, got {amount!r}")
        m = len(self.feature_names)
        numeric_cols = [j for j, k in enumerate(self.feature_kinds) if k == NUMERIC]
        for i, row in enumerate(self.rows):
            if len(row) != m:
                raise ValueError(f"row {i} has {len(row)} values, expected {m}")
            for j in numeric_cols:
                v = row.values[j]
                if not np.isfinite(v):
                    raise ValueError(f"row {i}, feature {self.feature_names[j]!r}: non-finite value {v!r}")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def feature_matrix(self, indices: list[int] | None = None) -> np.ndarray:
        """Numeric feature columns as a float array (rows x features)."""
        if indices is None:
            indices = [j for j, k in enumerate(self.feature_kinds) if k == NUMERIC]
        for j in indices:
            if self.feature_kinds[j] != NUMERIC:
                raise ValueError(f"feature {self.feature_names[j]!r} is categorical")
        return np.array([[row.values[j] for j in indices] for row in self.rows], dtype=float)

    def label_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=int)

    def subset_rows(self, indices) -> "Dataset":
        """Row subset, preserving the given index order."""
        return Dataset(
            feature_names=list(self.feature_names),
            feature_kinds=list(self.feature_kinds),
            rows=[FeatureRow(list(self.rows[i].values)) for i in indices],
            labels=[self.labels[i] for i in indices],
            amounts=[self.amounts[i] for i in indices],
            timestamps=[self.timestamps[i] for i in indices],
        )

    def select_features(self, indices: list[int]) -> "Dataset":
        """Column subset, preserving the given index order."""
        return Dataset(
            feature_names=[self.feature_names[j] for j in indices],
            feature_kinds=[self.feature_kinds[j] for j in indices],
            rows=[FeatureRow([row.values[j] for j in indices]) for row in self.rows],
            labels=list(self.labels),
            amounts=list(self.amounts),
            timestamps=list(self.timestamps),
        )

    def class_indices(self, label: int) -> list[int]:
        return [i for i, y in enumerate(self.labels) if y == label]


@dataclass
class SyntheticConfig:
    """Shape and signal strength of a generated portfolio."""

    n_genuine: int
    n_fraud: int
    n_numeric: int
    n_categorical: int = 0
    n_informative_single: int = 1
    n_informative_pair: int = 0
    noise_sd: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_genuine", "n_fraud", "n_numeric"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_categorical < 0 or self.n_informative_single < 0 or self.n_informative_pair < 0:
            raise ValueError("counts must be non-negative")
        if self.n_informative_single + 2 * self.n_informative_pair > self.n_numeric:
            raise ValueError("informative singles plus pair members exceed n_numeric")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")


def generate_synthetic(cfg: SyntheticConfig) -> Dataset:
    """Generate a labeled transaction table with planted class signal.

    Numeric features are iid standard normals.  A latent score sums the
    informative singles, the informative pair products and a noise term;
    the ``cfg.n_fraud`` highest-scoring rows get label 1, so class counts
    are exact.  Categorical columns are drawn after labels with fraud
    skewed towards the low category codes (so top-fraud-category encoding
    has something to find).  Timestamps are strictly increasing.
    Deterministic for a fixed seed (Philox, see :mod:`qkfraud.rng`).
    """
    rng = rng_from_seed(cfg.seed)
    n = cfg.n_genuine + cfg.n_fraud

    x = rng.standard_normal((n, cfg.n_numeric))
    score = np.zeros(n)
    for j in range(cfg.n_informative_single):
        score += _SINGLE_WEIGHT * x[:, j]
    pair_base = cfg.n_informative_single
    for p in range(cfg.n_informative_pair):
        i, j = pair_base + 2 * p, pair_base + 2 * p + 1
        score += _PAIR_WEIGHT * x[:, i] * x[:, j]
    score += cfg.noise_sd * rng.standard_normal(n)

    # argsort is stable, so score ties resolve by row index.
    order = np.argsort(score, kind="stable")
    labels = np.zeros(n, dtype=int)
    labels[order[n - cfg.n_fraud:]] = 1

    cat_values = None
    if cfg.n_categorical > 0:
        codes = [f"C{c}" for c in range(_N_CATEGORIES)]
        genuine_p = np.full(_N_CATEGORIES, 1.0 / _N_CATEGORIES)
        fraud_p = 0.6 ** np.arange(_N_CATEGORIES)
        fraud_p /= fraud_p.sum()
        cat_values = np.empty((n, cfg.n_categorical), dtype=object)
        for j in range(cfg.n_categorical):
            draws = rng.random(n)
            for who, p in ((0, genuine_p), (1, fraud_p)):
                mask = labels == who
                idx = np.searchsorted(np.cumsum(p), draws[mask])
                cat_values[mask, j] = np.array(codes)[np.minimum(idx, _N_CATEGORIES - 1)]

    amounts = np.exp(3.5 + 0.3 * labels + 0.8 * rng.standard_normal(n))
    timestamps = np.cumsum(rng.exponential(60.0, n) + 1e-6)

    feature_names = [f"num_{j}" for j in range(cfg.n_numeric)]
    feature_kinds = [NUMERIC] * cfg.n_numeric
    if cfg.n_categorical > 0:
        feature_names += [f"cat_{j}" for j in range(cfg.n_categorical)]
        feature_kinds += [CATEGORICAL] * cfg.n_categorical

    rows = []
    for i in range(n):
        values = [float(v) for v in x[i]]
        if cat_values is not None:
            values += [str(c) for c in cat_values[i]]
        rows.append(FeatureRow(values))

    return Dataset(
        feature_names=feature_names,
        feature_kinds=feature_kinds,
        rows=rows,
        labels=[int(v) for v in labels],
        amounts=[float(v) for v in amounts],
        timestamps=[float(v) for v in timestamps],
    )


def load_csv(path, schema: dict) -> Dataset:
    """Load a Dataset from a header-first CSV plus a column-role schema.

    ``schema`` maps roles to column names::

        {"label": ..., "amount": ..., "timestamp": ..., "categorical": [...]}

    Every column not named in the schema is a numeric feature.
    """
    path = Path(path)
    for role in ("label", "amount", "timestamp"):
        if role not in schema:
            raise SchemaError(f"schema is missing the {role!r} column")
    categorical = set(schema.get("categorical", []))

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(f"{path}: empty file") from None
        for role in ("label", "amount", "timestamp"):
            if schema[role] not in header:
                raise SchemaError(f"schema column {schema[role]!r} not found in header")
        for col in categorical:
            if col not in header:
                raise SchemaError(f"categorical column {col!r} not found in header")

        special = {schema["label"], schema["amount"], schema["timestamp"]}
        feature_names = [c for c in header if c not in special]
        feature_kinds = [CATEGORICAL if c in categorical else NUMERIC for c in feature_names]
        col_index = {c: i for i, c in enumerate(header)}

        rows, labels, amounts, timestamps = [], [], [], []
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise CsvParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}")
            try:
                label = int(record[col_index[schema["label"]]])
            except ValueError:
                raise CsvParseError(f"{path}:{lineno}: label is not an integer") from None
            if label not in (0, 1):
                raise CsvParseError(f"{path}:{lineno}: label must be 0 or 1, got {label}")
            try:
                amount = float(record[col_index[schema["amount"]]])
                timestamp = float(record[col_index[schema["timestamp"]]])
            except ValueError:
                raise CsvParseError(f"{path}:{lineno}: malformed amount or timestamp") from None
            values = []
            for name, kind in zip(feature_names, feature_kinds):
                raw = record[col_index[name]]
                if kind == CATEGORICAL:
                    values.append(raw)
                else:
                    try:
                        values.append(float(raw))
                    except ValueError:
                        raise CsvParseError(f"{path}:{lineno}: feature {name!r} is not numeric: {raw!r}") from None
            rows.append(FeatureRow(values))
            labels.append(label)
            amounts.append(amount)
            timestamps.append(timestamp)

    return Dataset(feature_names, feature_kinds, rows, labels, amounts, timestamps)


def write_csv(data: Dataset, path, schema: dict | None = None) -> dict:
    """Write a Dataset as CSV; returns the schema for the sidecar.

    Floats are written with ``repr`` so a reload reproduces them exactly.
    """
    if schema is None:
        schema = {"label": "label", "amount": "amount", "timestamp": "timestamp"}
    schema = dict(schema)
    schema["categorical"] = [
        name for name, kind in zip(data.feature_names, data.feature_kinds) if kind == CATEGORICAL
    ]
    header = data.feature_names + [schema["label"], schema["amount"], schema["timestamp"]]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row, label, amount, ts in zip(data.rows, data.labels, data.amounts, data.timestamps):
            record = [v if isinstance(v, str) else repr(v) for v in row.values]
            writer.writerow(record + [label, repr(amount), repr(ts)])
    return schema


def write_schema_sidecar(schema: dict, path) -> None:
    Path(path).write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n")


def load_schema_sidecar(path) -> dict:
    return json.loads(Path(path).read_text())
