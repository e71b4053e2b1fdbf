"""Seed derivation for every stochastic operation in the package.

All randomness flows through numpy's Philox4x64-10 counter-based bit
generator.  The algorithm is fixed (not "whatever the platform default
is") so a seed written into a config file produces the same bytes on
any machine and any numpy >= 1.24.

Derived streams (per-trial, per-subset, per-kernel-entry) are built with
``numpy.random.SeedSequence(entropy=seed, spawn_key=key)`` which is
likewise a documented, stable algorithm.  Two different spawn keys never
collide, so parallel consumers can draw independently in any order.
"""

from __future__ import annotations

import numpy as np


def rng_from_seed(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for ``seed``, optionally sub-keyed by ``key``.

    ``rng_from_seed(s)`` is the root stream; ``rng_from_seed(s, i, j)``
    is the stream for sub-task ``(i, j)``, independent of every other
    sub-key and of evaluation order.
    """
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse (seed, key...) into one 64-bit sub-seed.

    Used where an operation takes a plain integer seed but callers need a
    whole keyed family of them (e.g. one seed per Gram entry (i, j)).
    Spawn keys of different lengths never collide.
    """
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    state = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)).generate_state(2)
    return int(state[0]) << 32 | int(state[1])
