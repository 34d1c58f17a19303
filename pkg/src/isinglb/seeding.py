"""Platform-independent 64-bit seed mixing (SplitMix64 finalizer)."""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 output function applied to one 64-bit word."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Fold ``indices`` into ``seed`` so each index tuple gets its own stream."""
    h = mix64(seed & MASK64)
    for i in indices:
        h = mix64(h ^ (i & MASK64))
    return h


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorised :func:`mix64` over a ``uint64`` array (wrap-around arithmetic)."""
    z = x.astype(np.uint64) + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """``count`` doubles in [0, 1), the i-th a pure function of ``(seed, offset + i)``."""
    idx = np.arange(offset, offset + count, dtype=np.uint64)
    words = mix64_array(np.uint64(mix64(seed & MASK64)) ^ mix64_array(idx))
    return (words >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
