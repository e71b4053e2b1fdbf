"""Data preparation: correlation pruning, top-fraud-category encoding,
train/test splitting, balanced under-sampling trials, min-max scaling.

All operations are pure; each returns a new Dataset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import CATEGORICAL, NUMERIC, Dataset, FeatureRow
from .rng import rng_from_seed


@dataclass
class SplitSpec:
    """How to cut one table into train and test."""

    mode: str  # "chronological" | "random"
    train_fraction: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("chronological", "random"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


@dataclass
class ScalerParams:
    """Per-feature (min, max) from the training data plus the target interval.

    Constant features map to the interval midpoint; transformed values are
    clamped to [lo, hi] so unseen out-of-range data cannot push encoding
    angles outside the designed range.
    """

    feature_names: list[str]
    mins: list[float]
    maxs: list[float]
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.hi <= self.lo:
            raise ValueError("target interval must have hi > lo")
        for mn, mx in zip(self.mins, self.maxs):
            if mx < mn:
                raise ValueError("per-feature max must be >= min")

    def to_json(self) -> str:
        return json.dumps(
            {
                "feature_names": self.feature_names,
                "mins": self.mins,
                "maxs": self.maxs,
                "lo": self.lo,
                "hi": self.hi,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ScalerParams":
        obj = json.loads(text)
        return cls(obj["feature_names"], obj["mins"], obj["maxs"], obj["lo"], obj["hi"])


def _pearson_matrix(x: np.ndarray) -> np.ndarray:
    """Pearson correlations; constant columns correlate 0 with everything."""
    centered = x - x.mean(axis=0)
    sd = centered.std(axis=0)
    safe = np.where(sd == 0.0, 1.0, sd)
    z = centered / safe
    rho = (z.T @ z) / x.shape[0]
    constant = sd == 0.0
    rho[constant, :] = 0.0
    rho[:, constant] = 0.0
    np.fill_diagonal(rho, 1.0)
    return rho


def prune_correlated(data: Dataset, threshold: float) -> tuple[Dataset, list[str]]:
    """Drop the later feature of every numeric pair with |rho| >= threshold.

    Categorical features pass through untouched.  Scanning in column order
    and testing each candidate only against already-kept columns guarantees
    that every retained pair satisfies |rho| < threshold.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    numeric = [j for j, k in enumerate(data.feature_kinds) if k == NUMERIC]
    if len(numeric) < 2:
        raise ValueError("need at least two numeric features")
    rho = _pearson_matrix(data.feature_matrix(numeric))

    kept: list[int] = []
    removed: list[str] = []
    for pos, j in enumerate(numeric):
        if any(abs(rho[kpos, pos]) >= threshold for kpos in kept):
            removed.append(data.feature_names[j])
        else:
            kept.append(pos)
    removed_set = set(removed)
    keep_cols = [j for j in range(data.n_features) if data.feature_names[j] not in removed_set]
    return data.select_features(keep_cols), removed


def encode_top_categories(data: Dataset, k: int) -> Dataset:
    """Replace each categorical feature by indicators for its k categories
    with the most fraud.

    Categories outside the top k fall into the implicit all-zeros encoding.
    Ties on fraud count break by category code, then every feature count is
    deterministic.  With fewer than k distinct categories, one indicator per
    existing category is emitted.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if CATEGORICAL not in data.feature_kinds:
        return data

    new_names: list[str] = []
    new_kinds: list[str] = []
    plans: list[tuple[int, list[str]] | int] = []  # (col, top_categories) or passthrough col
    for j, kind in enumerate(data.feature_kinds):
        if kind != CATEGORICAL:
            plans.append(j)
            new_names.append(data.feature_names[j])
            new_kinds.append(kind)
            continue
        fraud_counts: dict[str, int] = {}
        for row, label in zip(data.rows, data.labels):
            value = row.values[j]
            fraud_counts.setdefault(value, 0)
            fraud_counts[value] += label
        top = sorted(fraud_counts, key=lambda v: (-fraud_counts[v], v))[:k]
        plans.append((j, top))
        for value in top:
            new_names.append(f"{data.feature_names[j]}={value}")
            new_kinds.append(NUMERIC)

    new_rows = []
    for row in data.rows:
        values: list = []
        for plan in plans:
            if isinstance(plan, int):
                values.append(row.values[plan])
            else:
                j, top = plan
                values.extend(1.0 if row.values[j] == v else 0.0 for v in top)
        new_rows.append(FeatureRow(values))

    return Dataset(new_names, new_kinds, new_rows, list(data.labels), list(data.amounts),
                   list(data.timestamps))


def split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Cut into (train, test); chronological sorts by timestamp first."""
    n = len(data)
    n_train = int(round(spec.train_fraction * n))
    if spec.mode == "chronological":
        order = sorted(range(n), key=lambda i: data.timestamps[i])
    else:
        order = list(rng_from_seed(spec.seed).permutation(n))
    return data.subset_rows(order[:n_train]), data.subset_rows(order[n_train:])


def undersample_trials(
    data: Dataset, target_genuine: int, target_fraud: int, n_trials: int, seed: int
) -> list[Dataset]:
    """n_trials balanced subsets, sampling each class without replacement.

    Trial t draws with sub-seed seed + t so the whole 5-trial protocol is
    reproducible from one number.  Row order within a trial follows the
    original table.
    """
    genuine = data.class_indices(0)
    fraud = data.class_indices(1)
    if target_genuine > len(genuine):
        raise ValueError(f"target_genuine {target_genuine} exceeds population {len(genuine)}")
    if target_fraud > len(fraud):
        raise ValueError(f"target_fraud {target_fraud} exceeds population {len(fraud)}")
    if n_trials <= 0:
        raise ValueError("n_trials must be positive")

    trials = []
    for t in range(n_trials):
        rng = rng_from_seed(seed + t)
        g = rng.choice(len(genuine), size=target_genuine, replace=False)
        f = rng.choice(len(fraud), size=target_fraud, replace=False)
        picked = sorted([genuine[i] for i in g] + [fraud[i] for i in f])
        trials.append(data.subset_rows(picked))
    return trials


def fit_scaler(train: Dataset, lo: float, hi: float) -> ScalerParams:
    """Per-feature min/max over an all-numeric training table."""
    if CATEGORICAL in train.feature_kinds:
        raise ValueError("scaler requires numeric features only; encode categoricals first")
    x = train.feature_matrix()
    return ScalerParams(
        feature_names=list(train.feature_names),
        mins=[float(v) for v in x.min(axis=0)],
        maxs=[float(v) for v in x.max(axis=0)],
        lo=float(lo),
        hi=float(hi),
    )


def apply_scaler(params: ScalerParams, data: Dataset) -> Dataset:
    """Map features onto [lo, hi]; constants go to the midpoint, the rest clamp."""
    if data.feature_names != params.feature_names:
        raise ValueError("scaler was fitted on different features")
    x = data.feature_matrix()
    mins = np.asarray(params.mins)
    maxs = np.asarray(params.maxs)
    span = maxs - mins
    mid = 0.5 * (params.lo + params.hi)
    scale = np.where(span == 0.0, 0.0, (params.hi - params.lo) / np.where(span == 0.0, 1.0, span))
    scaled = params.lo + (x - mins) * scale
    scaled = np.where(span == 0.0, mid, scaled)
    scaled = np.clip(scaled, params.lo, params.hi)
    rows = [FeatureRow([float(v) for v in r]) for r in scaled]
    return Dataset(list(data.feature_names), list(data.feature_kinds), rows, list(data.labels),
                   list(data.amounts), list(data.timestamps))
