"""Counter-based random numbers keyed by (seed, drop, tx, rx, counter).

Every draw is a pure function of its key, so the value a link receives does
not depend on evaluation order, chunking or the number of worker processes.
The mixer is the SplitMix64 finaliser applied once per key word; uniforms are
mapped to standard normals by inverse-CDF (``scipy.special.ndtri``).
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(x: np.ndarray) -> np.ndarray:
    z = x + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _as_u64(value) -> np.ndarray:
    if np.isscalar(value):
        return np.atleast_1d(np.uint64(int(value) & _MASK64))
    arr = np.asarray(value)
    if arr.dtype.kind == "i":
        return arr.astype(np.int64).view(np.uint64)
    return arr.astype(np.uint64)


def hash_keys(*keys) -> np.ndarray:
    """Broadcast the key words together and hash them to uint64."""
    words = np.broadcast_arrays(*(_as_u64(k) for k in keys))
    with np.errstate(over="ignore"):
        h = np.zeros(words[0].shape, dtype=np.uint64)
        for w in words:
            h = _mix(h ^ w)
    return h


def uniforms(*keys) -> np.ndarray:
    """Uniform deviates strictly inside (0, 1), 53-bit resolution."""
    h = hash_keys(*keys)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(*keys) -> np.ndarray:
    return ndtri(uniforms(*keys))


def link_normals(seed: int, drop: int, tx_ids, rx_ids, counter: int = 0) -> np.ndarray:
    """Standard normal deviate for each (tx, rx) link of a drop."""
    return normals(seed, drop, tx_ids, rx_ids, counter)


class RandomStream:
    """Sequential view of one key: successive draws advance the counter."""

    def __init__(self, seed: int, drop: int = 0, tx_id: int = 0, rx_id: int = 0, position: int = 0):
        self.key = (int(seed), int(drop), int(tx_id), int(rx_id))
        self.position = int(position)

    def normals(self, n: int) -> np.ndarray:
        counters = np.arange(self.position, self.position + n, dtype=np.uint64)
        self.position += n
        return normals(*self.key, counters)

    def normal(self) -> float:
        return float(self.normals(1)[0])
