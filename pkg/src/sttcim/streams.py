"""Deterministic counter-based random streams.

Every draw is a pure function of (seed, index): independent workers can
sample disjoint index ranges in any order and reproduce bit-identical
values.  Stateful generators cannot give that property for normals (ziggurat
rejection consumes a data-dependent number of uniforms), so normals here go
through the inverse CDF instead.

Quality is splitmix64-grade, which is plenty for threshold-crossing Monte
Carlo; the device tests check moment recovery empirically.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_MASK64 = 0xFFFFFFFFFFFFFFFF


def mix64(x):
    """splitmix64 finalizer, elementwise over uint64 arrays or scalars."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> _U64(30))) * _MIX1
        x = (x ^ (x >> _U64(27))) * _MIX2
        return x ^ (x >> _U64(31))


def seed_state(seed: int) -> np.uint64:
    """Pre-mixed seed word; decorrelates nearby integer seeds."""
    with np.errstate(over="ignore"):
        return mix64(_U64(seed & _MASK64) + _GOLDEN)[()]


def hash_words(seed: int, indices) -> np.ndarray:
    """64-bit stream words at the given indices."""
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(seed_state(seed) + (idx + _U64(1)) * _GOLDEN)


def uniforms(seed: int, indices) -> np.ndarray:
    """Doubles strictly inside (0, 1), one per index."""
    w = hash_words(seed, indices)
    # 53 mantissa bits, offset by half an ulp so 0.0 is unreachable.
    return (w >> _U64(11)).astype(np.float64) * 2.0**-53 + 2.0**-54


def unit_normals(seed: int, indices) -> np.ndarray:
    """Standard normal draws via the inverse CDF, one per index."""
    return ndtri(uniforms(seed, indices))
