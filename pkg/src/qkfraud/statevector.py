"""Dense n-qubit statevector engine: H, single-qubit phase, CX, sampling.

Qubit ordering convention, used everywhere in the package: qubit 0 is the
least-significant bit of the amplitude index, so basis index k assigns bit
``(k >> q) & 1`` to qubit q.  Bitstrings render the index in ordinary
binary, i.e. qubit 0 is the rightmost character and "00...0" is index 0.

States are immutable values; ``apply`` returns a fresh state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import rng_from_seed

MAX_QUBITS = 14

_SQRT2_INV = 1.0 / np.sqrt(2.0)
_NORM_TOL = 1e-10


class CapacityError(ValueError):
    """Requested more qubits than the dense engine supports."""


@dataclass(frozen=True)
class QuantumState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if len(self.amplitudes) != 2 ** self.n_qubits:
            raise ValueError("amplitude vector length must be 2**n_qubits")
        norm_sq = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm_sq - 1.0) > _NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm_sq}")


@dataclass(frozen=True)
class GateOp:
    """One of H, Phase(theta) or CX; ``targets`` are qubit indices.

    CX targets are (control, target).
    """

    kind: str  # "h" | "phase" | "cx"
    targets: tuple[int, ...]
    theta: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("h", "phase", "cx"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "cx":
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ValueError("cx needs distinct (control, target) qubits")
        elif len(self.targets) != 1:
            raise ValueError(f"{self.kind} acts on exactly one qubit")


def hadamard(q: int) -> GateOp:
    return GateOp("h", (q,))


def phase(theta: float, q: int) -> GateOp:
    return GateOp("phase", (q,), theta)


def cx(control: int, target: int) -> GateOp:
    return GateOp("cx", (control, target))


def zero_state(n: int) -> QuantumState:
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = 1.0
    return QuantumState(n, amps)


def _axis(q: int, n: int) -> int:
    # C-order reshape to [2]*n puts the most-significant bit first.
    return n - 1 - q


def _apply_raw(amps: np.ndarray, op: GateOp, n: int) -> np.ndarray:
    """Gate action on a bare amplitude array (shared with batched callers)."""
    for q in op.targets:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n}-qubit state")
    grid = amps.reshape([2] * n)
    if op.kind == "h":
        ax = _axis(op.targets[0], n)
        lo = np.take(grid, 0, axis=ax)
        hi = np.take(grid, 1, axis=ax)
        out = np.stack(((lo + hi) * _SQRT2_INV, (lo - hi) * _SQRT2_INV), axis=ax)
        return out.reshape(-1)
    if op.kind == "phase":
        ax = _axis(op.targets[0], n)
        out = grid.copy()
        idx = [slice(None)] * n
        idx[ax] = 1
        out[tuple(idx)] = grid[tuple(idx)] * np.exp(1j * op.theta)
        return out.reshape(-1)
    # cx: swap target-bit slices where the control bit is 1
    c_ax, t_ax = _axis(op.targets[0], n), _axis(op.targets[1], n)
    out = grid.copy()

    def sel(c_bit, t_bit):
        idx = [slice(None)] * n
        idx[c_ax], idx[t_ax] = c_bit, t_bit
        return tuple(idx)

    out[sel(1, 0)] = grid[sel(1, 1)]
    out[sel(1, 1)] = grid[sel(1, 0)]
    return out.reshape(-1)


def apply(state: QuantumState, op: GateOp) -> QuantumState:
    return QuantumState(state.n_qubits, _apply_raw(state.amplitudes, op, state.n_qubits))


def apply_all(state: QuantumState, ops) -> QuantumState:
    amps = state.amplitudes
    for op in ops:
        amps = _apply_raw(amps, op, state.n_qubits)
    return QuantumState(state.n_qubits, amps)


def invert_ops(ops) -> list[GateOp]:
    """Gate list of the inverse circuit (reverse order, phases negated)."""
    inverted = []
    for op in reversed(list(ops)):
        if op.kind == "phase":
            inverted.append(GateOp("phase", op.targets, -op.theta))
        else:
            inverted.append(op)  # H and CX are involutions
    return inverted


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>: conjugate-linear in a, linear in b."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("states must have equal qubit counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def bitstring(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def sample_counts(state: QuantumState, shots: int, seed: int) -> dict[str, int]:
    """Multinomial measurement histogram {bitstring: count}; Philox-seeded."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    counts = rng_from_seed(seed).multinomial(shots, probs)
    n = state.n_qubits
    return {bitstring(i, n): int(c) for i, c in enumerate(counts) if c > 0}
