"""Fraud KPIs: accuracy, AUC, confusion counts, hit rate (count- and
amount-weighted), false alarm ratio and the modified ROC* curve (hit rate
against false alerts per true alert).

Convention: a row is predicted fraud when its score is >= the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COUNT = "count"
AMOUNT = "amount"

# Two-sided 95% Student-t critical values for df = 1..30; 1.96 beyond.
_T_95 = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    2.201, 2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
    2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
]


@dataclass
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int
    tp_amount: float = 0.0
    fn_amount: float = 0.0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass
class RocStarCurve:
    """(false alarm ratio, hit rate) per threshold, ascending in the ratio."""

    thresholds: list[float]
    false_alarm_ratios: list[float]
    hit_rates: list[float]
    weighting: str


def _check_labels(labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        raise ValueError("empty input")
    return labels


def confusion_counts(labels, predictions, amounts=None) -> Confusion:
    """Tally a prediction vector against 0/1 labels.

    ``amounts`` (when given) fills the monetary tallies of caught and
    missed fraud.
    """
    labels = _check_labels(labels)
    predictions = np.asarray(predictions, dtype=int)
    if predictions.shape != labels.shape:
        raise ValueError("labels and predictions must have equal length")
    tp = int(np.sum((labels == 1) & (predictions == 1)))
    fp = int(np.sum((labels == 0) & (predictions == 1)))
    tn = int(np.sum((labels == 0) & (predictions == 0)))
    fn = int(np.sum((labels == 1) & (predictions == 0)))
    tp_amount = fn_amount = 0.0
    if amounts is not None:
        amounts = np.asarray(amounts, dtype=float)
        tp_amount = float(amounts[(labels == 1) & (predictions == 1)].sum())
        fn_amount = float(amounts[(labels == 1) & (predictions == 0)].sum())
    return Confusion(tp, fp, tn, fn, tp_amount, fn_amount)


def accuracy(labels, predictions) -> float:
    labels = _check_labels(labels)
    predictions = np.asarray(predictions, dtype=int)
    if predictions.shape != labels.shape:
        raise ValueError("labels and predictions must have equal length")
    return float(np.mean(labels == predictions))


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, ties sharing the average of their positions."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc(labels, scores) -> float:
    """P(random positive outscores random negative), ties counted half.

    Equals the trapezoidal area under the TPR-FPR curve.
    """
    labels = _check_labels(labels)
    scores = np.asarray(scores, dtype=float)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = _average_ranks(scores)
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def hit_rate(confusion: Confusion, weighting: str = COUNT) -> float:
    """Fraction of fraud intercepted, by record count or by amount."""
    if weighting == COUNT:
        total = confusion.tp + confusion.fn
        if total == 0:
            raise ValueError("hit rate undefined without actual fraud")
        return confusion.tp / total
    if weighting == AMOUNT:
        total = confusion.tp_amount + confusion.fn_amount
        if total == 0:
            raise ValueError("amount hit rate undefined without fraud amounts")
        return confusion.tp_amount / total
    raise ValueError(f"unknown weighting {weighting!r}")


def false_alarm_ratio(confusion: Confusion) -> float:
    """False alerts per true alert (fp : tp); +inf when nothing was caught."""
    if confusion.tp == 0:
        return float("inf")
    return confusion.fp / confusion.tp


def _sweep_thresholds(scores: np.ndarray) -> list[float]:
    """Midpoints between consecutive distinct scores plus +/-inf endpoints."""
    distinct = np.unique(scores)
    mids = [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    return [float("inf"), *reversed(mids), float("-inf")]


def roc_star(labels, scores, amounts=None, weighting: str = COUNT,
             scale_factor: float = 1.0) -> RocStarCurve:
    """Modified ROC: hit rate vs false alarm ratio over the threshold sweep.

    ``scale_factor`` multiplies the false-alarm axis to undo under-sampling
    of genuine records (1.0 = untouched).
    """
    labels = _check_labels(labels)
    scores = np.asarray(scores, dtype=float)
    if np.sum(labels == 1) == 0 or np.sum(labels == 0) == 0:
        raise ValueError("ROC* needs both classes present")
    if weighting == AMOUNT and amounts is None:
        raise ValueError("amount weighting needs transaction amounts")

    points = []
    for threshold in _sweep_thresholds(scores):
        predictions = (scores >= threshold).astype(int)
        conf = confusion_counts(labels, predictions, amounts)
        points.append((threshold, false_alarm_ratio(conf) * scale_factor,
                       hit_rate(conf, weighting)))
    points.sort(key=lambda p: (p[1], p[2]))
    return RocStarCurve(
        thresholds=[p[0] for p in points],
        false_alarm_ratios=[p[1] for p in points],
        hit_rates=[p[2] for p in points],
        weighting=weighting,
    )


@dataclass
class TrialSummary:
    """Mean with spread across repeated trials (Table-style reporting)."""

    mean: float
    std: float  # population std, matching the reported "±" convention
    ci_half_width: float  # t-based 95% half-width
    n: int

    def formatted(self, digits: int = 3) -> str:
        return f"{self.mean:.{digits}f} ± {self.std:.{digits}f}"


def aggregate_trials(values) -> TrialSummary:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("no trial values to aggregate")
    n = len(values)
    mean = float(values.mean())
    std = float(values.std())
    if n < 2:
        return TrialSummary(mean, std, float("nan"), n)
    sample_sd = float(values.std(ddof=1))
    t_crit = _T_95[n - 2] if n - 1 <= len(_T_95) else 1.96
    return TrialSummary(mean, std, t_crit * sample_sd / np.sqrt(n), n)
