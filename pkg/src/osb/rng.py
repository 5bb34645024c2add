"""Counter-based pseudorandom words for reproducible, partition-independent draws.

Every random quantity in this package is a pure function of a 64-bit key and a
word counter.  Draw ``d`` of a stream owns the fixed word range
``[d*words_per_draw, (d+1)*words_per_draw)``, so any partitioning of a draw
range across workers reproduces the serial sequence bit for bit.

The word function is the splitmix64 output mixer applied to the counter; keys
for distinct purposes are derived by folding integer tags into the seed with
the same mixer.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix_scalar(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_key(seed: int, *tags: int) -> int:
    """Fold integer tags into a seed, yielding an independent stream key."""
    key = _mix_scalar((seed & _MASK) + _GAMMA)
    for tag in tags:
        key = _mix_scalar(key ^ _mix_scalar((tag & _MASK) + _GAMMA))
    return key


def words(key: int, start: int, count: int) -> np.ndarray:
    """Words ``start .. start+count-1`` of the stream, as uint64."""
    z = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z *= np.uint64(_GAMMA)
    z += np.uint64(key & _MASK)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def uniforms(key: int, start: int, count: int) -> np.ndarray:
    """Uniform [0, 1) doubles from the 53 high bits of each word."""
    return (words(key, start, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53
