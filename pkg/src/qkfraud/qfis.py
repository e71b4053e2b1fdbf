"""Quantum feature importance selection: exhaustive search over feature
triples, then greedy forward extension, scored by kernel-SVM test accuracy
for a given feature-map configuration.

Every candidate subset gets its own quantum classifier: project the data,
build the Gram with as many qubits as selected features, train, score.
Within a stage evaluations are independent and may run on worker threads;
sampled modes draw from per-subset seeds so the schedule cannot change any
result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from . import svm
from .dataset import Dataset
from .feature_map import FeatureMapSpec
from .metrics import accuracy as accuracy_fn
from .metrics import auc as auc_fn
from .quantum_kernel import EXACT, KernelEvalMode, gram, gram_cross
from .rng import derive_seed

ACCURACY = "accuracy"
AUC = "auc"


class BudgetError(ValueError):
    """The initial exhaustive stage would exceed the evaluation cap."""


@dataclass
class QfisConfig:
    train: Dataset
    test: Dataset
    spec: FeatureMapSpec = FeatureMapSpec()
    target_size: int = 7
    p0: int = 3
    objective: str = ACCURACY
    C: float = 1.0
    eval_mode: KernelEvalMode = field(default_factory=KernelEvalMode.exact)
    budget_cap: int = 200_000
    allow_over_budget: bool = False
    jobs: int = 1
    kernel_override: object = None  # alternative exact kernel fn(spec, x, y)

    def __post_init__(self) -> None:
        m = self.train.n_features
        if self.train.feature_names != self.test.feature_names:
            raise ValueError("train and test must share the feature layout")
        if not self.p0 <= self.target_size <= m:
            raise ValueError(f"need p0 <= target_size <= {m}")
        if self.objective not in (ACCURACY, AUC):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @property
    def m(self) -> int:
        return self.train.n_features


@dataclass
class StageRecord:
    stage: int  # subset size at this stage
    features: tuple[int, ...]
    accuracy: float
    auc: float


@dataclass
class SelectionState:
    selected: list[int]  # in order of addition
    history: list[StageRecord]
    m: int
    p0: int

    def stage_best(self) -> list[StageRecord]:
        """The chosen record of each completed stage, in stage order."""
        best: dict[int, StageRecord] = {}
        chain = set()
        for size in sorted({r.stage for r in self.history}):
            chain = set(self.selected[:size])
            for record in self.history:
                if record.stage == size and set(record.features) == chain:
                    best[size] = record
                    break
        return [best[s] for s in sorted(best)]


def _objective_value(record: StageRecord, objective: str) -> float:
    return record.accuracy if objective == ACCURACY else record.auc


def evaluate_subset(cfg: QfisConfig, features) -> tuple[float, float]:
    """Train and score one quantum classifier on the given feature subset.

    Returns (test accuracy, test AUC).  Pure: exact mode is deterministic
    outright, sampled modes re-derive the same per-subset seed every call.
    """
    features = tuple(features)
    if len(set(features)) != len(features):
        raise ValueError("feature subset contains duplicates")
    spec = cfg.spec.with_n_features(len(features))
    mode = cfg.eval_mode
    if mode.kind != EXACT:
        mode = replace(mode, seed=derive_seed(mode.seed, *features))

    x_train = cfg.train.feature_matrix(list(features))
    x_test = cfg.test.feature_matrix(list(features))
    y_train = cfg.train.label_array()
    y_test = cfg.test.label_array()

    kernel = gram(spec, x_train, mode, kernel_fn=cfg.kernel_override)
    model = svm.train(kernel, y_train * 2 - 1, C=cfg.C)
    cross = gram_cross(spec, x_test, x_train, mode, kernel_fn=cfg.kernel_override)
    scores = svm.decision_scores(model, cross)
    predictions = (scores >= 0).astype(int)
    return accuracy_fn(y_test, predictions), auc_fn(y_test, scores)


def _evaluate_stage(cfg: QfisConfig, subsets: list[tuple[int, ...]]) -> list[StageRecord]:
    def one(features):
        acc, roc = evaluate_subset(cfg, features)
        return StageRecord(len(features), features, acc, roc)

    if cfg.jobs == 1 or len(subsets) == 1:
        return [one(s) for s in subsets]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(one, subsets))


def select_initial_triples(cfg: QfisConfig) -> SelectionState:
    """Exhaustively score all C(m, p0) subsets and pick the best.

    Ties break to the lexicographically smallest index set (combinations
    enumerate in that order and only strict improvements replace the
    leader).
    """
    n_initial = math.comb(cfg.m, cfg.p0)
    if n_initial > cfg.budget_cap and not cfg.allow_over_budget:
        raise BudgetError(
            f"initial stage needs {n_initial} evaluations, above the cap of "
            f"{cfg.budget_cap}; set allow_over_budget to proceed"
        )
    subsets = [tuple(c) for c in combinations(range(cfg.m), cfg.p0)]
    records = _evaluate_stage(cfg, subsets)
    best = records[0]
    for record in records[1:]:
        if _objective_value(record, cfg.objective) > _objective_value(best, cfg.objective):
            best = record
    return SelectionState(list(best.features), records, cfg.m, cfg.p0)


def extend_greedy(cfg: QfisConfig, state: SelectionState) -> SelectionState:
    """Add the one remaining feature that maximizes the objective."""
    if len(state.selected) >= cfg.target_size:
        raise ValueError("selection already reached target_size")
    remaining = [f for f in range(cfg.m) if f not in state.selected]
    subsets = [tuple(state.selected) + (f,) for f in remaining]
    records = _evaluate_stage(cfg, subsets)
    best = records[0]
    for record in records[1:]:
        if _objective_value(record, cfg.objective) > _objective_value(best, cfg.objective):
            best = record
    state.selected.append(best.features[-1])
    state.history.extend(records)
    return state


def run_qfis(cfg: QfisConfig) -> SelectionState:
    """Initial exhaustive stage, then greedy extension up to target_size."""
    state = select_initial_triples(cfg)
    while len(state.selected) < cfg.target_size:
        state = extend_greedy(cfg, state)
    return state


def expected_history_length(m: int, p0: int, target_size: int) -> int:
    return math.comb(m, p0) + sum(m - s for s in range(p0, target_size))


def paper_map_configs(base: FeatureMapSpec) -> dict[str, FeatureMapSpec]:
    """The four compared encodings: Z and ZZ at depth 1 and 2."""
    return {
        f"{order} depth {depth}": replace(base, order=order, depth=depth)
        for order in ("Z", "ZZ")
        for depth in (1, 2)
    }


def compare_maps(cfg: QfisConfig, specs: dict[str, FeatureMapSpec] | None = None):
    """Run the full selection once per feature-map configuration.

    Returns {label: SelectionState}; callers shape this into stagewise
    accuracy tables and spread plots.
    """
    specs = specs or paper_map_configs(cfg.spec)
    results = {}
    for label, spec in specs.items():
        sub_cfg = replace(cfg, spec=spec)
        results[label] = run_qfis(sub_cfg)
    return results
