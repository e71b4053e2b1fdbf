"""Soft-margin SVM on a precomputed kernel, trained with SMO.

The solver works entirely from a Gram matrix, so the same code trains
quantum-kernel models and classical-kernel metaclassifiers.  Pair
selection is the maximal-violating-pair rule; convergence means the
violation gap m - M drops below tol.  Hitting the iteration cap raises
instead of returning a silently unconverged model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quantum_kernel import KernelMatrix


class ConvergenceError(RuntimeError):
    """SMO hit its iteration cap before reaching the tolerance."""


@dataclass(frozen=True)
class ClassicalKernelSpec:
    kind: str = "rbf"  # "linear" | "rbf"
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown classical kernel {self.kind!r}")
        if self.kind == "rbf" and self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ClassicalKernelSpec":
        return cls(obj["kind"], obj.get("gamma", 1.0))


@dataclass
class SvmModel:
    """Dual solution: dual_coefs[i] = alpha_i * y_i over training rows.

    ``kernel_spec`` tags models whose kernel is a classical formula;
    ``None`` means the kernel columns are supplied precomputed at scoring
    time (quantum models).
    """

    dual_coefs: np.ndarray
    bias: float
    support_indices: np.ndarray
    C: float
    kernel_spec: ClassicalKernelSpec | None = None

    def to_json_dict(self) -> dict:
        return {
            "dual_coefs": [float(v) for v in self.dual_coefs],
            "bias": self.bias,
            "support_indices": [int(i) for i in self.support_indices],
            "C": self.C,
            "kernel_spec": None if self.kernel_spec is None else self.kernel_spec.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SvmModel":
        spec = obj.get("kernel_spec")
        return cls(
            dual_coefs=np.asarray(obj["dual_coefs"], dtype=float),
            bias=float(obj["bias"]),
            support_indices=np.asarray(obj["support_indices"], dtype=int),
            C=float(obj["C"]),
            kernel_spec=None if spec is None else ClassicalKernelSpec.from_json_dict(spec),
        )


def _as_matrix(gram) -> np.ndarray:
    if isinstance(gram, KernelMatrix):
        return gram.values
    return np.asarray(gram, dtype=float)


def train(
    gram,
    labels,
    C: float,
    tol: float = 1e-3,
    max_iter: int = 200_000,
    kernel_spec: ClassicalKernelSpec | None = None,
    objective_trace: list | None = None,
) -> SvmModel:
    """SMO on the dual problem for a precomputed kernel.

    ``labels`` must be a +/-1 vector with both classes present.  Passing a
    list as ``objective_trace`` records the dual objective once per
    iteration (quadratic cost; meant for small diagnostics runs).
    """
    k = _as_matrix(gram)
    y = np.asarray(labels, dtype=float)
    n = len(y)
    if k.shape != (n, n):
        raise ValueError(f"gram shape {k.shape} does not match {n} labels")
    if not np.all(np.isfinite(k)):
        raise ValueError("gram matrix contains non-finite entries")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise ValueError("training needs both classes present")
    if C <= 0:
        raise ValueError("C must be positive")

    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of (1/2) a'Qa - e'a at alpha = 0
    pos = y > 0

    for _ in range(max_iter):
        if objective_trace is not None:
            objective_trace.append(dual_objective(k, y, alpha))
        neg_yg = -y * grad
        up = (pos & (alpha < C)) | (~pos & (alpha > 0.0))
        low = (~pos & (alpha < C)) | (pos & (alpha > 0.0))
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = up_idx[np.argmax(neg_yg[up_idx])]
        j = low_idx[np.argmin(neg_yg[low_idx])]
        m, mm = neg_yg[i], neg_yg[j]
        if m - mm <= tol:
            break

        quad = k[i, i] + k[j, j] - 2.0 * k[i, j]
        step = (m - mm) / max(quad, 1e-12)
        # box limits along the feasible direction (alpha_i += y_i t, alpha_j -= y_j t)
        limit_i = C - alpha[i] if y[i] > 0 else alpha[i]
        limit_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = min(step, limit_i, limit_j)

        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        # snap to the box to avoid eps-drift in the index sets
        for t in (i, j):
            if alpha[t] < 1e-12:
                alpha[t] = 0.0
            elif alpha[t] > C - 1e-12:
                alpha[t] = C
        grad += y * (step * (k[:, i] - k[:, j]))
    else:
        raise ConvergenceError(f"SMO did not converge within {max_iter} iterations (gap {m - mm:.3e})")

    neg_yg = -y * grad
    free = (alpha > 0.0) & (alpha < C)
    if free.any():
        bias = float(np.mean(neg_yg[free]))
    else:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0.0))
        low = (~pos & (alpha < C)) | (pos & (alpha > 0.0))
        bias = float((neg_yg[up].max() + neg_yg[low].min()) / 2.0)

    return SvmModel(
        dual_coefs=alpha * y,
        bias=bias,
        support_indices=np.flatnonzero(alpha > 0.0),
        C=float(C),
        kernel_spec=kernel_spec,
    )


def decision_scores(model: SvmModel, cross: np.ndarray) -> np.ndarray:
    """f(x) = sum_i alpha_i y_i k(x_i, x) + b for each row of the cross matrix.

    ``cross[r, i]`` is the kernel between evaluation row r and training
    row i; the sign of f is the predicted class, the raw value feeds ROC
    sweeps.
    """
    cross = np.asarray(cross, dtype=float)
    if cross.ndim != 2 or cross.shape[1] != len(model.dual_coefs):
        raise ValueError(
            f"cross matrix needs {len(model.dual_coefs)} columns, got shape {cross.shape}"
        )
    return cross @ model.dual_coefs + model.bias


def dual_objective(gram, labels, alpha) -> float:
    """Value of the (maximized) dual: sum(alpha) - 1/2 a'Qa."""
    k = _as_matrix(gram)
    y = np.asarray(labels, dtype=float)
    a = np.asarray(alpha, dtype=float)
    ay = a * y
    return float(a.sum() - 0.5 * ay @ k @ ay)


def classical_gram(spec: ClassicalKernelSpec, rows_a, rows_b) -> np.ndarray:
    """Linear or RBF kernel matrix between two row sets."""
    a = np.asarray(rows_a, dtype=float)
    b = np.asarray(rows_b, dtype=float)
    if a.shape[1] != b.shape[1]:
        raise ValueError("row sets must share the feature dimension")
    if spec.kind == "linear":
        return a @ b.T
    sq = np.sum(a ** 2, axis=1)[:, None] + np.sum(b ** 2, axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.exp(-spec.gamma * np.clip(sq, 0.0, None))
