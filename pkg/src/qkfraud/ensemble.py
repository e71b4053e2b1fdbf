"""Mixed quantum-classical classifier: a quantum-kernel SVM and a boosted
tree model score every row; where they agree the common label stands, and
a metaclassifier trained only on training-set disagreements decides who to
believe otherwise.

Both base scores are min-max normalized to [0, 1] using training-score
ranges fixed at train time.  The meta input is the union of both bases'
feature subsets plus the two normalized scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import svm as svm_mod
from .classical_models import (
    GbtModel,
    LogisticModel,
    predict_gbt,
    predict_logistic,
    train_logistic,
)
from .feature_map import FeatureMapSpec
from .quantum_kernel import KernelEvalMode, gram_cross
from .rng import rng_from_seed

AGREED = "agreed"
META_RESOLVED = "meta_resolved"

# below this many disagreement rows, auto meta selection stays logistic
_AUTO_SVM_MIN_ROWS = 50


@dataclass
class ScoreNormalizer:
    """Min-max transform onto [0, 1], frozen at training time."""

    lo: float
    hi: float

    def apply(self, scores) -> np.ndarray:
        scores = np.asarray(scores, dtype=float)
        if self.hi <= self.lo:
            return np.full(scores.shape, 0.5)
        return np.clip((scores - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    @classmethod
    def fit(cls, scores) -> "ScoreNormalizer":
        scores = np.asarray(scores, dtype=float)
        return cls(float(scores.min()), float(scores.max()))


@dataclass
class DisagreementSet:
    """Rows where the two bases predict different labels at the threshold."""

    indices: np.ndarray  # positions in the scored row set
    labels: np.ndarray  # true 0/1 labels
    q_scores: np.ndarray  # normalized quantum scores
    c_scores: np.ndarray  # normalized classical scores
    quantum_correct: np.ndarray  # per-row flag: the quantum base was right
    rows: np.ndarray | None = None  # meta input features, when provided

    def __len__(self) -> int:
        return len(self.indices)


@dataclass
class MetaModel:
    """Disagreement referee: logistic, kernel SVM, or a constant rule."""

    kind: str  # "logistic" | "svm" | "constant"
    logistic: LogisticModel | None = None
    svm: svm_mod.SvmModel | None = None
    svm_rows: np.ndarray | None = None  # training rows for kernel columns
    constant_label: int = 0


@dataclass
class EnsembleModel:
    q_svm: svm_mod.SvmModel
    q_spec: FeatureMapSpec
    q_features: list[int]
    q_train_rows: np.ndarray
    q_norm: ScoreNormalizer
    q_eval_mode: KernelEvalMode
    c_gbt: GbtModel
    c_features: list[int]
    c_norm: ScoreNormalizer
    meta: MetaModel
    meta_features: list[int]
    threshold: float = 0.5


def find_disagreements(q_scores, c_scores, labels, threshold: float = 0.5,
                       rows=None) -> DisagreementSet:
    """Rows whose thresholded base predictions differ.

    On each such row exactly one base is correct, so ``quantum_correct``
    fully describes the outcome.  ``rows`` (when given) carries the meta
    input features for those rows.
    """
    q_scores = np.asarray(q_scores, dtype=float)
    c_scores = np.asarray(c_scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if not (len(q_scores) == len(c_scores) == len(labels)):
        raise ValueError("score vectors and labels must have equal length")
    q_pred = q_scores >= threshold
    c_pred = c_scores >= threshold
    mask = q_pred != c_pred
    idx = np.flatnonzero(mask)
    return DisagreementSet(
        indices=idx,
        labels=labels[idx],
        q_scores=q_scores[idx],
        c_scores=c_scores[idx],
        quantum_correct=q_pred[idx] == (labels[idx] == 1),
        rows=None if rows is None else np.asarray(rows, dtype=float)[idx],
    )


def _meta_inputs(dis: DisagreementSet) -> np.ndarray:
    if dis.rows is None:
        raise ValueError("disagreement set has no feature rows for the meta")
    return np.hstack([dis.rows, dis.q_scores[:, None], dis.c_scores[:, None]])


def train_meta(dis: DisagreementSet, kind: str = "auto", seed: int = 0) -> MetaModel:
    """Fit the referee on disagreement rows; target is the true label.

    Degenerate cases: an empty set defers to the classical base; a
    single-class set becomes a constant rule (which on its training rows
    equals always trusting the base that was always right).  ``auto``
    keeps logistic for small sets and otherwise picks logistic vs RBF-SVM
    by held-out accuracy.
    """
    if kind not in ("auto", "logistic", "svm"):
        raise ValueError(f"unknown meta kind {kind!r}")
    if len(dis) == 0:
        return MetaModel(kind="constant", constant_label=-1)  # score: defer to classical
    if dis.labels.min() == dis.labels.max():
        return MetaModel(kind="constant", constant_label=int(dis.labels[0]))

    x = _meta_inputs(dis)
    y = dis.labels.astype(float)

    if kind == "auto":
        if len(dis) < _AUTO_SVM_MIN_ROWS:
            kind = "logistic"
        else:
            kind = _pick_meta_kind(x, y, seed)
    if kind == "logistic":
        return MetaModel(kind="logistic", logistic=train_logistic(x, y, l2=1e-3))
    return _fit_meta_svm(x, y)


def _fit_meta_svm(x, y) -> MetaModel:
    spec = svm_mod.ClassicalKernelSpec("rbf", gamma=1.0 / x.shape[1])
    kernel = svm_mod.classical_gram(spec, x, x)
    model = svm_mod.train(kernel, y * 2 - 1, C=1.0, kernel_spec=spec)
    return MetaModel(kind="svm", svm=model, svm_rows=x)


def _pick_meta_kind(x, y, seed: int) -> str:
    """Validation split on the disagreement set; ties keep logistic."""
    order = rng_from_seed(seed, 77).permutation(len(y))
    cut = int(0.7 * len(y))
    tr, va = order[:cut], order[cut:]
    if len(np.unique(y[tr])) < 2 or len(va) == 0:
        return "logistic"
    candidates = {}
    logistic = train_logistic(x[tr], y[tr], l2=1e-3)
    candidates["logistic"] = np.mean((predict_logistic(logistic, x[va]) >= 0.5) == (y[va] == 1))
    meta_svm = _fit_meta_svm(x[tr], y[tr])
    cross = svm_mod.classical_gram(meta_svm.svm.kernel_spec, x[va], x[tr])
    candidates["svm"] = np.mean(
        (svm_mod.decision_scores(meta_svm.svm, cross) >= 0) == (y[va] == 1)
    )
    return "logistic" if candidates["logistic"] >= candidates["svm"] else "svm"


def predict_meta(meta: MetaModel, rows_with_scores: np.ndarray,
                 c_scores=None, threshold: float = 0.5) -> np.ndarray:
    """Meta labels for disagreement rows (meta-feature layout as at fit)."""
    n = len(rows_with_scores)
    if meta.kind == "constant":
        if meta.constant_label == -1:  # defer to the classical base
            if c_scores is None:
                raise ValueError("deferring meta needs the classical scores")
            return (np.asarray(c_scores) >= threshold).astype(int)
        return np.full(n, meta.constant_label, dtype=int)
    if meta.kind == "logistic":
        return (predict_logistic(meta.logistic, rows_with_scores) >= 0.5).astype(int)
    cross = svm_mod.classical_gram(meta.svm.kernel_spec, rows_with_scores, meta.svm_rows)
    return (svm_mod.decision_scores(meta.svm, cross) >= 0).astype(int)


def train_ensemble(
    x_train: np.ndarray,
    y_train: np.ndarray,
    q_features: list[int],
    q_spec: FeatureMapSpec,
    c_gbt: GbtModel,
    c_features: list[int],
    q_C: float = 1.0,
    q_eval_mode: KernelEvalMode | None = None,
    threshold: float = 0.5,
    meta_kind: str = "auto",
    seed: int = 0,
) -> tuple[EnsembleModel, DisagreementSet]:
    """Wire both bases on the training set and fit the meta on their
    disagreements.

    The classical base arrives pre-trained (it may come from a randomized
    search); the quantum SVM is trained here.  Returns the model and the
    training disagreement set (its size over n gives the disagreement
    rate).
    """
    from .quantum_kernel import gram

    x_train = np.asarray(x_train, dtype=float)
    y_train = np.asarray(y_train, dtype=int)
    mode = q_eval_mode or KernelEvalMode.exact()
    spec = q_spec.with_n_features(len(q_features))

    xq = x_train[:, q_features]
    kernel = gram(spec, xq, mode)
    q_model = svm_mod.train(kernel, y_train * 2 - 1, C=q_C)
    q_raw = svm_mod.decision_scores(q_model, kernel.values)
    q_norm = ScoreNormalizer.fit(q_raw)

    c_raw = predict_gbt(c_gbt, x_train[:, c_features])
    c_norm = ScoreNormalizer.fit(c_raw)

    meta_features = sorted(set(q_features) | set(c_features))
    dis = find_disagreements(
        q_norm.apply(q_raw), c_norm.apply(c_raw), y_train, threshold,
        rows=x_train[:, meta_features],
    )
    meta = train_meta(dis, kind=meta_kind, seed=seed)
    model = EnsembleModel(
        q_svm=q_model,
        q_spec=spec,
        q_features=list(q_features),
        q_train_rows=xq,
        q_norm=q_norm,
        q_eval_mode=mode,
        c_gbt=c_gbt,
        c_features=list(c_features),
        c_norm=c_norm,
        meta=meta,
        meta_features=meta_features,
        threshold=threshold,
    )
    return model, dis


def ensemble_scores(model: EnsembleModel, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized (quantum, classical) base scores for new rows."""
    rows = np.asarray(rows, dtype=float)
    cross = gram_cross(model.q_spec, rows[:, model.q_features], model.q_train_rows,
                       model.q_eval_mode)
    q = model.q_norm.apply(svm_mod.decision_scores(model.q_svm, cross))
    c = model.c_norm.apply(predict_gbt(model.c_gbt, rows[:, model.c_features]))
    return q, c


def predict_ensemble(model: EnsembleModel, rows: np.ndarray) -> tuple[np.ndarray, list[str]]:
    """Labels plus per-row provenance ("agreed" or "meta_resolved").

    Agreement rows pass the common label through untouched; the meta only
    ever sees the disagreement rows.
    """
    rows = np.asarray(rows, dtype=float)
    q, c = ensemble_scores(model, rows)
    q_pred = (q >= model.threshold).astype(int)
    c_pred = (c >= model.threshold).astype(int)
    labels = q_pred.copy()
    provenance = [AGREED] * len(rows)

    disagree = np.flatnonzero(q_pred != c_pred)
    if disagree.size:
        meta_rows = np.hstack([
            rows[disagree][:, model.meta_features],
            q[disagree][:, None],
            c[disagree][:, None],
        ])
        labels[disagree] = predict_meta(
            model.meta, meta_rows, c_scores=c[disagree], threshold=model.threshold
        )
        for i in disagree:
            provenance[i] = META_RESOLVED
    return labels, provenance


def complementarity_scatter(q_scores, c_scores, labels) -> list[tuple[float, float, int]]:
    """(classical score, quantum score, label) triples for the scatter plot.

    Off-diagonal quadrants (one score above 0.5, the other below) are the
    disagreement region.
    """
    q_scores = np.asarray(q_scores, dtype=float)
    c_scores = np.asarray(c_scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if not (len(q_scores) == len(c_scores) == len(labels)):
        raise ValueError("score vectors and labels must have equal length")
    return [(float(c), float(q), int(y)) for c, q, y in zip(c_scores, q_scores, labels)]
