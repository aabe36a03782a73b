"""Portable deterministic random numbers.

Catalogs, subsamples, and projection layouts must reproduce bit-exactly
from a 64-bit seed on any platform, so this module implements a fixed,
documented stack instead of delegating to a platform RNG:

* SplitMix64 (Steele, Lea & Flood 2014) as a counter-based uint64 stream:
  draw ``i`` is a pure function ``mix64(seed + (i+1) * GAMMA) mod 2**64``.
* Uniforms in [0, 1) from the top 53 bits of each draw.
* Normals via the Box-Muller transform.
* Subsampling via a partial Fisher-Yates shuffle (modulo draw; the bias
  is below 2**-50 for the set sizes involved).

Child seeds are derived with :func:`derive_seed`, which feeds the mixed
parent seed and index back through SplitMix64.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0**-53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Deterministic child seed for stream ``index`` of a parent seed."""
    if index < 0:
        raise ValueError("index must be non-negative")
    return mix64((seed + (index + 1) * _GAMMA) & _MASK)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class Stream:
    """Counter-based SplitMix64 stream with a 64-bit seed.

    Draw ``i`` (0-based) is ``mix64(seed + (i+1)*GAMMA)``; block and
    one-at-a-time access therefore yield identical sequences.
    """

    def __init__(self, seed: int) -> None:
        self._seed = int(seed) & _MASK
        self._index = 0

    @property
    def seed(self) -> int:
        return self._seed

    def next_uint64(self) -> int:
        self._index += 1
        return mix64(self._seed + self._index * _GAMMA)

    def uint64s(self, n: int) -> np.ndarray:
        """Next ``n`` raw draws as a uint64 array."""
        counters = np.arange(self._index + 1, self._index + n + 1, dtype=np.uint64)
        self._index += n
        z = np.uint64(self._seed) + counters * np.uint64(_GAMMA)
        return _mix64_array(z)

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` uniforms in [0, 1), float64."""
        bits = self.uint64s(n) >> np.uint64(11)
        return bits.astype(np.float64) * _INV_2_53

    def normals(self, n: int) -> np.ndarray:
        """Next ``n`` standard normals via Box-Muller.

        Each pair of uniforms (u1 in (0,1], u2 in [0,1)) yields
        ``r*cos(2*pi*u2)`` then ``r*sin(2*pi*u2)`` with
        ``r = sqrt(-2*ln(u1))``; the sequence is truncated to ``n``.
        """
        pairs = (n + 1) // 2
        bits = self.uint64s(2 * pairs) >> np.uint64(11)
        u = bits.astype(np.float64)
        u1 = (u[0::2] + 1.0) * _INV_2_53
        u2 = u[1::2] * _INV_2_53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * math.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def below(self, bound: int) -> int:
        """Next draw reduced modulo ``bound`` (bound >= 1)."""
        return self.next_uint64() % bound


def subsample_indices(total: int, draw: int, seed: int) -> np.ndarray:
    """Indices of ``draw`` distinct elements out of ``total``.

    Partial Fisher-Yates over ``0..total-1``: position ``i`` swaps with a
    draw from ``i..total-1``. The result order is itself deterministic in
    ``(seed, total, draw)``.
    """
    if not 0 <= draw <= total:
        raise ValueError(f"cannot draw {draw} from {total}")
    stream = Stream(seed)
    idx = np.arange(total, dtype=np.int64)
    for i in range(draw):
        j = i + stream.below(total - i)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:draw]
