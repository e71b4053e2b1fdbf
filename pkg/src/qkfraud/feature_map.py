"""Data-encoding circuits: Z and ZZ feature maps with depth, entanglement
and angle-scale knobs, plus the closed-form kernel of the depth-1 Z map.

One block of the circuit is a Hadamard layer followed by diagonal phases:
``Phase(2*alpha*x_i)`` on qubit i and, for the ZZ map,
``Phase(2*alpha*(pi - x_i)*(pi - x_j))`` on each entangled pair realized as
CX-Phase-CX.  ``encode`` applies the block ``depth`` times to |0...0>.

Features are expected pre-scaled to [-1, 1]; ``alpha`` (default 2.0) sets
the effective rotation range, so no separate remap to [0, 2*pi] exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import GateOp, QuantumState, apply_all, cx, hadamard, phase, zero_state

Z = "Z"
ZZ = "ZZ"
FULL = "full"
LINEAR = "linear"


@dataclass(frozen=True)
class FeatureMapSpec:
    """Shape of the encoding unitary; n_features equals the qubit count."""

    order: str = ZZ
    depth: int = 2
    entanglement: str = FULL
    alpha: float = 2.0
    n_features: int = 2

    def __post_init__(self) -> None:
        if self.order not in (Z, ZZ):
            raise ValueError(f"order must be Z or ZZ, got {self.order!r}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.entanglement not in (FULL, LINEAR):
            raise ValueError(f"entanglement must be full or linear, got {self.entanglement!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")

    def with_n_features(self, n: int) -> "FeatureMapSpec":
        return FeatureMapSpec(self.order, self.depth, self.entanglement, self.alpha, n)

    def to_json_dict(self) -> dict:
        return {
            "order_of_expansion": self.order,
            "depth": self.depth,
            "entanglement": self.entanglement,
            "alpha": self.alpha,
            "n_features": self.n_features,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "FeatureMapSpec":
        known = {"order_of_expansion", "depth", "entanglement", "alpha", "n_features"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown feature map keys: {sorted(unknown)}")
        return cls(
            order=obj.get("order_of_expansion", ZZ),
            depth=obj.get("depth", 2),
            entanglement=obj.get("entanglement", FULL),
            alpha=obj.get("alpha", 2.0),
            n_features=obj.get("n_features", 2),
        )


def entangled_pairs(spec: FeatureMapSpec) -> list[tuple[int, int]]:
    """Qubit pairs carrying the second-order phase, in lexicographic order."""
    n = spec.n_features
    if spec.entanglement == LINEAR:
        return [(i, i + 1) for i in range(n - 1)]
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def pair_angle(alpha: float, xi: float, xj: float) -> float:
    return 2.0 * alpha * (np.pi - xi) * (np.pi - xj)


def circuit(spec: FeatureMapSpec, x) -> list[GateOp]:
    """The gate list of the encoding unitary for feature vector x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n_features,):
        raise ValueError(f"expected {spec.n_features} features, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    n = spec.n_features
    ops: list[GateOp] = []
    for _ in range(spec.depth):
        ops.extend(hadamard(q) for q in range(n))
        ops.extend(phase(2.0 * spec.alpha * x[q], q) for q in range(n))
        if spec.order == ZZ:
            for i, j in entangled_pairs(spec):
                ops.append(cx(i, j))
                ops.append(phase(pair_angle(spec.alpha, x[i], x[j]), j))
                ops.append(cx(i, j))
    return ops


def encode(spec: FeatureMapSpec, x) -> QuantumState:
    """|psi(x)> = [D_phi(x) H^n]^depth |0...0>."""
    return apply_all(zero_state(spec.n_features), circuit(spec, x))


def _bit_table(n: int) -> np.ndarray:
    indices = np.arange(2 ** n)
    return ((indices[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def _phase_diagonal(spec: FeatureMapSpec, xs: np.ndarray) -> np.ndarray:
    """Diagonal of D_phi per row: (rows, 2**n) complex phases."""
    n = spec.n_features
    bits = _bit_table(n)
    angles = (2.0 * spec.alpha * xs) @ bits.T
    if spec.order == ZZ:
        pairs = entangled_pairs(spec)
        if pairs:
            pair_angles = np.stack(
                [2.0 * spec.alpha * (np.pi - xs[:, i]) * (np.pi - xs[:, j]) for i, j in pairs],
                axis=1,
            )
            xor_bits = np.stack(
                [np.logical_xor(bits[:, i], bits[:, j]).astype(float) for i, j in pairs],
                axis=1,
            )
            angles = angles + pair_angles @ xor_bits.T
    return np.exp(1j * angles)


def _hadamard_layer(batch: np.ndarray, n: int) -> np.ndarray:
    """Normalized H^{\\otimes n} along the amplitude axis of (rows, 2**n)."""
    rows = batch.shape[0]
    grid = batch.reshape([rows] + [2] * n)
    for q in range(n):
        ax = n - q  # amplitude axes start at 1; qubit q sits at axis n - q
        lo = np.take(grid, 0, axis=ax)
        hi = np.take(grid, 1, axis=ax)
        grid = np.stack((lo + hi, lo - hi), axis=ax)
    return grid.reshape(rows, -1) * (2.0 ** (-n / 2.0))


def encode_batch(spec: FeatureMapSpec, xs) -> np.ndarray:
    """Encoded statevectors for many rows at once: (rows, 2**n_features).

    Row r equals ``encode(spec, xs[r]).amplitudes`` to numerical precision;
    this is the fast path for Gram assembly.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != spec.n_features:
        raise ValueError(f"expected (rows, {spec.n_features}) features, got {xs.shape}")
    n = spec.n_features
    dim = 2 ** n
    diag = _phase_diagonal(spec, xs)
    state = np.full((xs.shape[0], dim), 2.0 ** (-n / 2.0), dtype=complex)
    state = diag * state
    for _ in range(spec.depth - 1):
        state = diag * _hadamard_layer(state, n)
    return state


def z_kernel_closed_form(alpha: float, x, y) -> float:
    """Fidelity of two depth-1 Z-map encodings: prod_i cos^2(alpha*(x_i-y_i))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("feature vectors must have equal length")
    return float(np.prod(np.cos(alpha * (x - y)) ** 2))


def z_kernel_closed_form_matrix(alpha: float, xs, ys) -> np.ndarray:
    """Closed-form depth-1 Z-map kernel for all row pairs: (len(xs), len(ys))."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    diff = xs[:, None, :] - ys[None, :, :]
    return np.prod(np.cos(alpha * diff) ** 2, axis=2)
