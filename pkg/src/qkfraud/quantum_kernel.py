"""Fidelity kernel k(x, y) = |<0| U(x)^dag U(y) |0>|^2 and Gram assembly.

Three evaluation modes:

* ``exact``       -- statevector overlap, no sampling;
* ``shots``       -- run U(y) then the inverse of U(x) on |0...0>, sample
                     bitstrings, report the all-zeros frequency;
* ``noisy_shots`` -- as ``shots``, with per-qubit readout bit flips applied
                     to the samples and, optionally, calibration-matrix
                     readout mitigation.

Sampled Gram entries draw from per-entry seeds derived as
``derive_seed(seed, i, j)``, so a parallel evaluation order cannot change
any result.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .feature_map import FeatureMapSpec, _hadamard_layer, _phase_diagonal, circuit, encode, encode_batch
from .rng import derive_seed, rng_from_seed
from .statevector import apply_all, bitstring, inner_product, invert_ops, zero_state

EXACT = "exact"
SHOTS = "shots"
NOISY_SHOTS = "noisy_shots"


@dataclass(frozen=True)
class ReadoutNoiseModel:
    """Independent per-qubit readout flips: p01 = P(read 1 | true 0),
    p10 = P(read 0 | true 1)."""

    p01: tuple[float, ...]
    p10: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.p01) != len(self.p10):
            raise ValueError("p01 and p10 must cover the same qubits")
        for p in (*self.p01, *self.p10):
            if not 0.0 <= p < 0.5:
                raise ValueError(f"flip probabilities must lie in [0, 0.5), got {p}")

    @property
    def n_qubits(self) -> int:
        return len(self.p01)

    @classmethod
    def uniform(cls, n_qubits: int, p: float) -> "ReadoutNoiseModel":
        return cls((p,) * n_qubits, (p,) * n_qubits)

    def confusion_2x2(self, q: int) -> np.ndarray:
        """Column-stochastic per-qubit confusion matrix [measured, true]."""
        return np.array(
            [[1.0 - self.p01[q], self.p10[q]], [self.p01[q], 1.0 - self.p10[q]]]
        )

    def to_json_dict(self) -> dict:
        return {"p01": list(self.p01), "p10": list(self.p10)}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ReadoutNoiseModel":
        return cls(tuple(obj["p01"]), tuple(obj["p10"]))


@dataclass(frozen=True)
class KernelEvalMode:
    """How kernel values are estimated; see module docstring."""

    kind: str = EXACT
    n_shots: int = 8192
    seed: int = 0
    noise: ReadoutNoiseModel | None = None
    mitigate: bool = False

    def __post_init__(self) -> None:
        if self.kind not in (EXACT, SHOTS, NOISY_SHOTS):
            raise ValueError(f"unknown eval mode {self.kind!r}")
        if self.n_shots < 1:
            raise ValueError("n_shots must be >= 1")
        if self.kind == NOISY_SHOTS and self.noise is None:
            raise ValueError("noisy_shots mode needs a ReadoutNoiseModel")

    @classmethod
    def exact(cls) -> "KernelEvalMode":
        return cls(EXACT)

    @classmethod
    def shots(cls, n_shots: int, seed: int) -> "KernelEvalMode":
        return cls(SHOTS, n_shots=n_shots, seed=seed)

    @classmethod
    def noisy_shots(
        cls, n_shots: int, seed: int, noise: ReadoutNoiseModel, mitigate: bool = False
    ) -> "KernelEvalMode":
        return cls(NOISY_SHOTS, n_shots=n_shots, seed=seed, noise=noise, mitigate=mitigate)

    def to_json_dict(self) -> dict:
        obj: dict = {"kind": self.kind}
        if self.kind != EXACT:
            obj["n_shots"] = self.n_shots
            obj["seed"] = self.seed
        if self.kind == NOISY_SHOTS:
            obj["noise"] = self.noise.to_json_dict()
            obj["mitigate"] = self.mitigate
        return obj

    @classmethod
    def from_json_dict(cls, obj: dict) -> "KernelEvalMode":
        kind = obj.get("kind", EXACT)
        if kind == EXACT:
            return cls.exact()
        if kind == SHOTS:
            return cls.shots(obj["n_shots"], obj["seed"])
        return cls.noisy_shots(
            obj["n_shots"],
            obj["seed"],
            ReadoutNoiseModel.from_json_dict(obj["noise"]),
            obj.get("mitigate", False),
        )


@dataclass
class KernelMatrix:
    """Symmetric Gram matrix; row order is the training row order."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("kernel matrix must be square")
        if not np.array_equal(v, v.T):
            raise ValueError("kernel matrix must be exactly symmetric")
        self.values = v

    @property
    def n(self) -> int:
        return self.values.shape[0]


def kernel_exact(spec: FeatureMapSpec, x, y) -> float:
    """|<psi(x)|psi(y)>|^2 from the statevector overlap."""
    return float(abs(inner_product(encode(spec, x), encode(spec, y))) ** 2)


def composed_probs(spec: FeatureMapSpec, x, y) -> np.ndarray:
    """Outcome distribution of U(y) followed by the inverse of U(x) on |0>.

    Gate-by-gate reference construction; entry 0 (the all-zeros string)
    equals the exact kernel value.
    """
    ops = circuit(spec, y) + invert_ops(circuit(spec, x))
    state = apply_all(zero_state(spec.n_features), ops)
    return np.abs(state.amplitudes) ** 2


def composed_probs_batch(spec: FeatureMapSpec, x, ys) -> np.ndarray:
    """Composed-circuit distributions for one x against many y at once.

    Row j equals ``composed_probs(spec, x, ys[j])`` to numerical precision.
    U(x)^dag = (H^n D(x)^*)^depth, so the inverse half is ``depth`` rounds
    of a conjugated diagonal followed by a Hadamard layer.
    """
    x = np.asarray(x, dtype=float)
    n = spec.n_features
    states = encode_batch(spec, np.asarray(ys, dtype=float))
    diag_conj = _phase_diagonal(spec, x[None, :]).conj()
    for _ in range(spec.depth):
        states = _hadamard_layer(states * diag_conj, n)
    return np.abs(states) ** 2


def kernel_shots(spec: FeatureMapSpec, x, y, n_shots: int, seed: int) -> float:
    """All-zeros frequency over n_shots samples of the composed circuit."""
    counts = _sample_composed(spec, x, y, n_shots, seed)
    zeros = bitstring(0, spec.n_features)
    return counts.get(zeros, 0) / n_shots


def _counts_from_probs(probs: np.ndarray, n: int, n_shots: int, seed: int) -> dict[str, int]:
    probs = probs / probs.sum()
    counts = rng_from_seed(seed).multinomial(n_shots, probs)
    return {bitstring(i, n): int(c) for i, c in enumerate(counts) if c > 0}


def _sample_composed(spec, x, y, n_shots, seed) -> dict[str, int]:
    probs = composed_probs_batch(spec, x, [y])[0]
    return _counts_from_probs(probs, spec.n_features, n_shots, seed)


def apply_readout_noise(
    counts: dict[str, int], noise: ReadoutNoiseModel, seed: int
) -> dict[str, int]:
    """Flip each measured bit independently with its p01/p10; shots preserved."""
    if not counts:
        return {}
    n = len(next(iter(counts)))
    if noise.n_qubits != n:
        raise ValueError("noise model qubit count does not match the histogram")
    keys = sorted(counts)
    shots = np.repeat([int(k, 2) for k in keys], [counts[k] for k in keys])
    rng = rng_from_seed(seed)
    p01 = np.asarray(noise.p01)
    p10 = np.asarray(noise.p10)
    for q in range(n):
        bit = (shots >> q) & 1
        p_flip = np.where(bit == 0, p01[q], p10[q])
        flips = rng.random(len(shots)) < p_flip
        shots = shots ^ (flips.astype(np.int64) << q)
    values, tallies = np.unique(shots, return_counts=True)
    return {bitstring(int(v), n): int(c) for v, c in zip(values, tallies)}


def mitigate_readout(counts: dict[str, float], noise: ReadoutNoiseModel) -> np.ndarray:
    """Invert the tensor-product calibration matrix on the empirical
    distribution.

    The full calibration matrix is the Kronecker product of the per-qubit
    2x2 confusion matrices; its inverse factorizes the same way, so the
    inverse is applied one qubit axis at a time.  The result sums to 1 but
    individual entries may be slightly negative (quasi-probabilities).
    Index order follows the package bitstring convention (qubit 0 = LSB).
    """
    if not counts:
        raise ValueError("empty histogram")
    n = len(next(iter(counts)))
    if noise.n_qubits != n:
        raise ValueError("noise model qubit count does not match the histogram")
    total = float(sum(counts.values()))
    p = np.zeros(2 ** n)
    for key, value in counts.items():
        p[int(key, 2)] = value / total
    grid = p.reshape([2] * n)
    for q in range(n):
        inv = np.linalg.inv(noise.confusion_2x2(q))
        ax = n - 1 - q
        grid = np.moveaxis(np.tensordot(inv, grid, axes=([1], [ax])), 0, ax)
    return grid.reshape(-1)


def clip_quasi_probs(quasi: np.ndarray) -> np.ndarray:
    """Clip negatives to zero and renormalize; fallback to uniform if empty."""
    clipped = np.clip(quasi, 0.0, None)
    total = clipped.sum()
    if total <= 0.0:
        return np.full_like(clipped, 1.0 / len(clipped))
    return clipped / total


def _sampled_value(probs: np.ndarray, n: int, mode: KernelEvalMode, entry_seed: int) -> float:
    """Kernel estimate from a composed-circuit distribution under a sampled mode."""
    zeros = bitstring(0, n)
    if mode.kind == SHOTS:
        counts = _counts_from_probs(probs, n, mode.n_shots, entry_seed)
        return counts.get(zeros, 0) / mode.n_shots
    counts = _counts_from_probs(probs, n, mode.n_shots, derive_seed(entry_seed, 0))
    noisy = apply_readout_noise(counts, mode.noise, derive_seed(entry_seed, 1))
    if not mode.mitigate:
        return noisy.get(zeros, 0) / mode.n_shots
    mitigated = clip_quasi_probs(mitigate_readout(noisy, mode.noise))
    return float(mitigated[0])


def evaluate_entry(spec: FeatureMapSpec, x, y, mode: KernelEvalMode, entry_seed: int) -> float:
    """One kernel value under the given mode (entry_seed ignored in exact mode)."""
    if mode.kind == EXACT:
        return kernel_exact(spec, x, y)
    probs = composed_probs_batch(spec, x, [y])[0]
    return _sampled_value(probs, spec.n_features, mode, entry_seed)


def psd_clip(values: np.ndarray) -> np.ndarray:
    """Project a symmetric matrix onto the PSD cone by zeroing negative
    eigenvalues."""
    w, v = np.linalg.eigh(values)
    if w.min() >= 0.0:
        return values
    rebuilt = (v * np.clip(w, 0.0, None)) @ v.T
    return (rebuilt + rebuilt.T) / 2.0


def gram(
    spec: FeatureMapSpec,
    rows,
    mode: KernelEvalMode,
    enforce_psd: bool = True,
    kernel_fn=None,
) -> KernelMatrix:
    """Symmetric Gram matrix over training rows.

    Exact mode computes the upper triangle from batched encodings and sets
    the diagonal to 1 without evaluation; sampled modes estimate every
    i <= j entry with its own derived seed and then mirror.  ``enforce_psd``
    eigenvalue-clips sampled matrices (exact ones are PSD already).
    ``kernel_fn(spec, x, y)`` swaps in an alternative exact kernel, e.g. the
    closed-form depth-1 Z oracle.
    """
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[0]
    if mode.kind == EXACT:
        if kernel_fn is None:
            psi = encode_batch(spec, rows)
            values = np.abs(psi.conj() @ psi.T) ** 2
        else:
            values = np.zeros((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    values[i, j] = kernel_fn(spec, rows[i], rows[j])
        values = np.clip(values, 0.0, 1.0)
        np.fill_diagonal(values, 1.0)
        values = np.triu(values) + np.triu(values, 1).T
        return KernelMatrix(values)

    nq = spec.n_features
    values = np.zeros((n, n))
    for i in range(n):
        probs = composed_probs_batch(spec, rows[i], rows[i:])
        for j in range(i, n):
            values[i, j] = _sampled_value(probs[j - i], nq, mode, derive_seed(mode.seed, i, j))
    values = np.triu(values) + np.triu(values, 1).T
    if enforce_psd:
        values = psd_clip(values)
        values = (values + values.T) / 2.0
        # eigh reconstruction is symmetric to fp error; force exact symmetry
        values = np.triu(values) + np.triu(values, 1).T
    return KernelMatrix(values)


def gram_cross(
    spec: FeatureMapSpec,
    rows_a,
    rows_b,
    mode: KernelEvalMode,
    kernel_fn=None,
) -> np.ndarray:
    """Rectangular kernel matrix k(a_i, b_j) for scoring, shape (len_a, len_b)."""
    rows_a = np.asarray(rows_a, dtype=float)
    rows_b = np.asarray(rows_b, dtype=float)
    if mode.kind == EXACT:
        if kernel_fn is None:
            psi_a = encode_batch(spec, rows_a)
            psi_b = encode_batch(spec, rows_b)
            return np.clip(np.abs(psi_a.conj() @ psi_b.T) ** 2, 0.0, 1.0)
        values = np.empty((rows_a.shape[0], rows_b.shape[0]))
        for i in range(rows_a.shape[0]):
            for j in range(rows_b.shape[0]):
                values[i, j] = kernel_fn(spec, rows_a[i], rows_b[j])
        return values
    nq = spec.n_features
    values = np.empty((rows_a.shape[0], rows_b.shape[0]))
    for i in range(rows_a.shape[0]):
        probs = composed_probs_batch(spec, rows_a[i], rows_b)
        for j in range(rows_b.shape[0]):
            values[i, j] = _sampled_value(probs[j], nq, mode, derive_seed(mode.seed, 1, i, j))
    return values


def save_kernel_matrix(path, values: np.ndarray) -> None:
    np.save(Path(path), np.asarray(values))


def load_kernel_matrix(path) -> np.ndarray:
    return np.load(Path(path))
