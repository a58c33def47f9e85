"""Counter-based 64-bit pseudo-random generator (SplitMix64).

The i-th output depends only on (seed, i), so streams are reproducible
across implementations and trivially parallel:

    value_at(seed, i) = mix64((seed + (i + 1) * GAMMA) mod 2^64)

with GAMMA = 0x9E3779B97F4A7C15 and mix64 the SplitMix64 finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

(all arithmetic mod 2^64). This matches the reference SplitMix64
sequence: for seed 0 the first three outputs are

    0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F

which are frozen as test vectors in the suite and in the README.

Uniform doubles take the top 53 bits: u = (value >> 11) * 2^-53, so
u is in [0, 1). A categorical draw over weights alpha picks the
smallest j with u < alpha_0 + ... + alpha_j.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

_U64_GAMMA = np.uint64(GAMMA)
_U64_C1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_C2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def value_at(seed: int, index: int) -> int:
    """The index-th raw 64-bit output of the stream keyed by seed."""
    if index < 0:
        raise ValueError("index must be nonnegative")
    return mix64((seed + (index + 1) * GAMMA) & MASK64)


def uniform_at(seed: int, index: int) -> float:
    """The index-th uniform double in [0, 1)."""
    return (value_at(seed, index) >> 11) * _INV53


def uniform_block(seed: int, start: int, count: int) -> np.ndarray:
    """Vectorized uniform doubles for indices start..start+count-1.

    Bit-identical to calling uniform_at per index.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = (np.uint64(seed & MASK64) + idx * _U64_GAMMA).astype(np.uint64)
    z = (z ^ (z >> _S30)) * _U64_C1
    z = (z ^ (z >> _S27)) * _U64_C2
    z = z ^ (z >> _S31)
    return (z >> _S11).astype(np.float64) * _INV53


def categorical_block(seed: int, start: int, count: int,
                      alpha: np.ndarray) -> np.ndarray:
    """Draw count categorical outcomes j ~ alpha, one per counter index.

    Outcome j is the smallest index with u < cumsum(alpha)[j]; a final
    clip guards against cumulative rounding at u ~ 1.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0:
        raise ValueError("alpha must be a nonempty 1-D weight vector")
    if np.any(alpha < 0):
        raise ValueError("alpha must be nonnegative")
    total = float(alpha.sum())
    if not np.isfinite(total) or total <= 0:
        raise ValueError("alpha must have positive total mass")
    cum = np.cumsum(alpha / total)
    u = uniform_block(seed, start, count)
    return np.minimum(np.searchsorted(cum, u, side="right"),
                      alpha.size - 1).astype(np.int64)
