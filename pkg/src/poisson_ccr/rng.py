"""Counter-based uniforms: every draw is a pure function of (seed, replicate, stream, index).

The mixer is the SplitMix64 finaliser applied in a keyed cascade. Because no
state is carried between draws, any subset of replicates can be generated in
any order, on any worker, and reproduce the same values.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _as_u64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.int64).astype(np.uint64) if np.ndim(x) else np.uint64(int(x) & (2**64 - 1))


def stream_key(seed: int, replicate, stream: int) -> np.ndarray:
    """Key for one logical stream of one replicate (vectorised over ``replicate``)."""
    with np.errstate(over="ignore"):
        k = _mix(np.uint64(int(seed) & (2**64 - 1)) + _GOLDEN)
        k = _mix(k ^ (_as_u64(replicate) * _GOLDEN + _M2))
        return _mix(k ^ (np.uint64(stream) * _M1 + _GOLDEN))


def uniforms(key, index) -> np.ndarray:
    """Uniform doubles strictly inside (0, 1) for each (key, index) pair (broadcast)."""
    with np.errstate(over="ignore"):
        z = _mix(np.asarray(key, dtype=np.uint64) + (_as_u64(index) + np.uint64(1)) * _GOLDEN)
    return ((z >> _S11).astype(np.float64) + 0.5) * _INV53
