"""Classical baselines: CART-style trees, bootstrap random forest,
first-order gradient-boosted trees with logistic loss, L2 logistic
regression, and randomized hyperparameter search with stratified k-fold CV.

The boosted model approximates XGBoost: stagewise regression trees on the
logistic-loss gradient, depth limits and min_child_weight, but no Hessian
weighting and no column subsampling.  Since every sample has unit weight
in the first-order fit, min_child_weight acts as a minimum child sample
count.

Split tie-breaking is deterministic: lowest feature index, then lowest
threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import derive_seed, rng_from_seed

GINI = "gini"
SSE = "sse"


@dataclass
class TreeParams:
    max_depth: int = 3
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: int | None = None  # candidate features per split; None = all

    def __post_init__(self) -> None:
        if self.max_depth < 1 or self.min_samples_split < 2 or self.min_samples_leaf < 1:
            raise ValueError("invalid tree parameters")


@dataclass
class TreeNode:
    feature: int  # -1 marks a leaf
    threshold: float
    left: int
    right: int
    value: float  # class-1 fraction (gini) or mean target (sse)
    gain: float


@dataclass
class TreeModel:
    nodes: list[TreeNode]
    n_features: int

    def to_json_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "nodes": [
                [n.feature, n.threshold, n.left, n.right, n.value, n.gain] for n in self.nodes
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TreeModel":
        nodes = [TreeNode(int(f), t, int(l), int(r), v, g) for f, t, l, r, v, g in obj["nodes"]]
        return cls(nodes, int(obj["n_features"]))


def _impurity_splits(x_col, y, y_sq, min_leaf, criterion):
    """Gain and threshold for every legal split of one column.

    Returns (gains, thresholds) ascending in threshold; empty arrays when
    the column admits no split.
    """
    order = np.argsort(x_col, kind="mergesort")
    xs = x_col[order]
    ys = y[order]
    n = len(ys)
    csum = np.cumsum(ys)
    total = csum[-1]
    n_left = np.arange(1, n)
    n_right = n - n_left
    sum_left = csum[:-1]
    sum_right = total - sum_left

    valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return np.empty(0), np.empty(0)

    if criterion == GINI:
        p_left = sum_left / n_left
        p_right = sum_right / n_right
        child = n_left * 2 * p_left * (1 - p_left) + n_right * 2 * p_right * (1 - p_right)
        p = total / n
        parent = n * 2 * p * (1 - p)
    else:
        csq = np.cumsum(y_sq[order])
        sq_left = csq[:-1]
        sq_right = csq[-1] - sq_left
        child = (sq_left - sum_left ** 2 / n_left) + (sq_right - sum_right ** 2 / n_right)
        parent = csq[-1] - total ** 2 / n

    gains = np.where(valid, parent - child, -np.inf)
    thresholds = (xs[:-1] + xs[1:]) / 2.0
    keep = np.flatnonzero(valid)
    return gains[keep], thresholds[keep]


def train_tree(x, y, params: TreeParams, seed: int, criterion: str = GINI) -> TreeModel:
    """Grow one tree; classification targets are 0/1, regression targets real."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.shape
    y_sq = y ** 2
    rng = rng_from_seed(seed)
    nodes: list[TreeNode] = []

    def leaf(idx):
        nodes.append(TreeNode(-1, 0.0, -1, -1, float(y[idx].mean()), 0.0))
        return len(nodes) - 1

    def grow(idx, depth):
        if depth >= params.max_depth or len(idx) < params.min_samples_split:
            return leaf(idx)
        if y[idx].min() == y[idx].max():
            return leaf(idx)

        if params.max_features is not None and params.max_features < m:
            candidates = np.sort(rng.choice(m, size=params.max_features, replace=False))
        else:
            candidates = np.arange(m)

        best_gain, best_feature, best_threshold = 0.0, -1, 0.0
        for f in candidates:
            gains, thresholds = _impurity_splits(
                x[idx, f], y[idx], y_sq[idx], params.min_samples_leaf, criterion
            )
            if gains.size == 0:
                continue
            k = int(np.argmax(gains))  # first max -> lowest threshold
            if gains[k] > best_gain + 1e-12:
                best_gain, best_feature, best_threshold = float(gains[k]), int(f), float(thresholds[k])
        if best_feature < 0:
            return leaf(idx)

        go_left = x[idx, best_feature] <= best_threshold
        me = len(nodes)
        nodes.append(TreeNode(best_feature, best_threshold, -1, -1, float(y[idx].mean()), best_gain))
        nodes[me].left = grow(idx[go_left], depth + 1)
        nodes[me].right = grow(idx[~go_left], depth + 1)
        return me

    grow(np.arange(n), 0)
    return TreeModel(nodes, m)


def predict_tree(tree: TreeModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    features = np.array([node.feature for node in tree.nodes])
    thresholds = np.array([node.threshold for node in tree.nodes])
    lefts = np.array([node.left for node in tree.nodes])
    rights = np.array([node.right for node in tree.nodes])
    values = np.array([node.value for node in tree.nodes])

    position = np.zeros(len(x), dtype=int)
    active = features[position] >= 0
    while active.any():
        rows = np.flatnonzero(active)
        cur = position[rows]
        go_left = x[rows, features[cur]] <= thresholds[cur]
        position[rows] = np.where(go_left, lefts[cur], rights[cur])
        active[rows] = features[position[rows]] >= 0
    return values[position]


@dataclass
class ForestParams:
    n_estimators: int = 100
    max_depth: int = 8
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: int | None = None  # None = round(sqrt(m))

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")


@dataclass
class ForestModel:
    trees: list[TreeModel]
    params: ForestParams
    seed: int


def train_forest(x, y, params: ForestParams, seed: int) -> ForestModel:
    """Bootstrap-aggregated Gini trees; tree t uses the sub-seed (seed, t)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _require_both_classes(y)
    n, m = x.shape
    max_features = params.max_features or max(1, round(np.sqrt(m)))
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_split=params.min_samples_split,
        min_samples_leaf=params.min_samples_leaf,
        max_features=max_features,
    )
    trees = []
    for t in range(params.n_estimators):
        rng = rng_from_seed(seed, t)
        bootstrap = rng.integers(0, n, size=n)
        trees.append(train_tree(x[bootstrap], y[bootstrap], tree_params, derive_tree_seed(seed, t)))
    return ForestModel(trees, params, seed)


def derive_tree_seed(seed: int, t: int) -> int:
    return derive_seed(seed, t, 1)


def predict_forest(model: ForestModel, x) -> np.ndarray:
    """Mean of per-tree leaf class-1 fractions."""
    x = np.asarray(x, dtype=float)
    return np.mean([predict_tree(tree, x) for tree in model.trees], axis=0)


@dataclass
class GbtParams:
    n_estimators: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_child_weight: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.n_estimators < 0:
            raise ValueError("n_estimators must be >= 0")


@dataclass
class GbtModel:
    initial_log_odds: float
    learning_rate: float
    trees: list[TreeModel]
    train_log_loss: list[float] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "initial_log_odds": self.initial_log_odds,
            "learning_rate": self.learning_rate,
            "trees": [t.to_json_dict() for t in self.trees],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "GbtModel":
        return cls(
            float(obj["initial_log_odds"]),
            float(obj["learning_rate"]),
            [TreeModel.from_json_dict(t) for t in obj["trees"]],
        )


def _sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_loss(y, p):
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def _require_both_classes(y):
    if np.min(y) == np.max(y):
        raise ValueError("training needs both classes present")


def train_gbt(x, y, params: GbtParams, seed: int) -> GbtModel:
    """Stagewise regression trees on the logistic-loss gradient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _require_both_classes(y)
    base = float(np.mean(y))
    f = np.full(len(y), np.log(base / (1.0 - base)))
    model = GbtModel(float(f[0]), params.learning_rate, [])
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_split=max(2, 2 * params.min_child_weight),
        min_samples_leaf=params.min_child_weight,
    )
    model.train_log_loss.append(_log_loss(y, _sigmoid(f)))
    for t in range(params.n_estimators):
        residuals = y - _sigmoid(f)
        tree = train_tree(x, residuals, tree_params, derive_tree_seed(seed, t), criterion=SSE)
        model.trees.append(tree)
        f = f + params.learning_rate * predict_tree(tree, x)
        model.train_log_loss.append(_log_loss(y, _sigmoid(f)))
    return model


def predict_gbt(model: GbtModel, x) -> np.ndarray:
    """Class-1 probability: sigmoid of the summed leaf outputs."""
    x = np.asarray(x, dtype=float)
    f = np.full(len(x), model.initial_log_odds)
    for tree in model.trees:
        f = f + model.learning_rate * predict_tree(tree, x)
    return _sigmoid(f)


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float

    def to_json_dict(self) -> dict:
        return {"weights": [float(w) for w in self.weights], "intercept": self.intercept}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LogisticModel":
        return cls(np.asarray(obj["weights"], dtype=float), float(obj["intercept"]))


def train_logistic(x, y, l2: float = 1e-6, max_iter: int = 100) -> LogisticModel:
    """Newton's method on the L2-regularized log-likelihood (sum form).

    The intercept is unpenalized.  Converges to gradient norm < 1e-6.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _require_both_classes(y)
    if l2 < 0:
        raise ValueError("l2 must be non-negative")
    n, m = x.shape
    z = np.hstack([x, np.ones((n, 1))])
    beta = np.zeros(m + 1)
    ridge = l2 * np.diag([1.0] * m + [0.0])

    def loss(b):
        p = np.clip(_sigmoid(z @ b), 1e-12, 1 - 1e-12)
        return -np.sum(y * np.log(p) + (1 - y) * np.log(1 - p)) + 0.5 * l2 * b[:m] @ b[:m]

    for _ in range(max_iter):
        p = _sigmoid(z @ beta)
        grad = z.T @ (p - y) + ridge @ beta
        if np.linalg.norm(grad) < 1e-6:
            break
        w = np.clip(p * (1.0 - p), 1e-12, None)
        hessian = (z * w[:, None]).T @ z + ridge + 1e-12 * np.eye(m + 1)
        step = np.linalg.solve(hessian, grad)
        # halve the step until the loss improves (separable-data safety)
        current = loss(beta)
        scale = 1.0
        for _ in range(50):
            candidate = beta - scale * step
            if loss(candidate) <= current:
                break
            scale *= 0.5
        beta = beta - scale * step
    return LogisticModel(beta[:m].copy(), float(beta[m]))


def predict_logistic(model: LogisticModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _sigmoid(x @ model.weights + model.intercept)


def feature_importance(model) -> np.ndarray:
    """Split-gain totals per feature, normalized to sum 1."""
    if isinstance(model, TreeModel):
        trees = [model]
    elif isinstance(model, ForestModel):
        trees = model.trees
    elif isinstance(model, GbtModel):
        trees = model.trees
    else:
        raise TypeError(f"no feature importance for {type(model).__name__}")
    m = trees[0].n_features if trees else 0
    totals = np.zeros(m)
    for tree in trees:
        for node in tree.nodes:
            if node.feature >= 0:
                totals[node.feature] += node.gain
    s = totals.sum()
    return totals / s if s > 0 else totals


@dataclass
class SearchSpec:
    """Randomized hyperparameter search: distributions are either a list of
    choices or a (lo, hi) tuple sampled uniformly."""

    distributions: dict
    n_candidates: int = 10
    k_folds: int = 3
    seed: int = 0
    objective: str = "accuracy"  # "accuracy" | "auc"

    def __post_init__(self) -> None:
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if self.objective not in ("accuracy", "auc"):
            raise ValueError(f"unknown objective {self.objective!r}")


_MODEL_KINDS = {
    "forest": (ForestParams, train_forest, predict_forest),
    "gbt": (GbtParams, train_gbt, predict_gbt),
}


def _stratified_folds(y, k, rng) -> list[np.ndarray]:
    folds = [[] for _ in range(k)]
    for label in (0, 1):
        idx = np.flatnonzero(y == label)
        idx = idx[rng.permutation(len(idx))]
        for pos, i in enumerate(idx):
            folds[pos % k].append(int(i))
    return [np.sort(np.array(f, dtype=int)) for f in folds]


def _sample_candidate(distributions, rng) -> dict:
    candidate = {}
    for name in sorted(distributions):
        dist = distributions[name]
        if isinstance(dist, tuple) and len(dist) == 2 and all(isinstance(v, float) for v in dist):
            candidate[name] = float(rng.uniform(dist[0], dist[1]))
        elif isinstance(dist, (list, tuple)):
            candidate[name] = dist[int(rng.integers(len(dist)))]
        else:
            raise ValueError(f"distribution for {name!r} must be a list or (lo, hi) tuple")
    return candidate


def randomized_search(x, y, model_kind: str, spec: SearchSpec):
    """Sample n_candidates parameter sets, score each by stratified k-fold
    CV, return (best_params, table of (params, mean_score)).

    Ties keep the earliest-sampled candidate; everything is deterministic
    per seed.
    """
    if model_kind not in _MODEL_KINDS:
        raise ValueError(f"unknown model kind {model_kind!r}")
    params_cls, train_fn, predict_fn = _MODEL_KINDS[model_kind]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    from .metrics import accuracy as accuracy_fn
    from .metrics import auc as auc_fn

    rng = rng_from_seed(spec.seed)
    folds = _stratified_folds(y, spec.k_folds, rng_from_seed(spec.seed, 999))

    table = []
    for c in range(spec.n_candidates):
        candidate = _sample_candidate(spec.distributions, rng)
        params = params_cls(**candidate)
        fold_scores = []
        for f, fold in enumerate(folds):
            mask = np.ones(len(y), dtype=bool)
            mask[fold] = False
            model = train_fn(x[mask], y[mask], params, derive_tree_seed(spec.seed, c * spec.k_folds + f))
            scores = predict_fn(model, x[fold])
            if spec.objective == "accuracy":
                fold_scores.append(accuracy_fn(y[fold].astype(int), (scores >= 0.5).astype(int)))
            else:
                fold_scores.append(auc_fn(y[fold].astype(int), scores))
        table.append((candidate, float(np.mean(fold_scores))))

    best = max(range(len(table)), key=lambda i: table[i][1])
    return table[best][0], table
