"""Counter-based pseudorandom function on 64-bit keys.

Every random decision in this package is a pure function of
(seed, stream, counter) built from the splitmix64 output permutation.
There is no stream state: values can be queried in any order, from any
process, and always agree.

Two implementations share the same arithmetic: a scalar path on Python
ints (hot loops) and a vectorized path on uint64 numpy arrays (batch
audits).  ``tests/test_prf.py`` pins their equality.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# splitmix64 increment and finalizer multipliers
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# salts separating the seed and stream halves of the key schedule
_SEED_SALT = 0xA0761D6478BD642F
_STREAM_SALT = 0xE7037ED1A0B428DB


def mix64(z: int) -> int:
    """splitmix64 finalizer: a bijection on 64-bit ints with full avalanche."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_base(seed: int, stream: int) -> int:
    """Per-(seed, stream) offset; counters are hashed relative to it."""
    return mix64(mix64((seed & MASK64) ^ _SEED_SALT) + mix64((stream & MASK64) ^ _STREAM_SALT))


def prf64(base: int, counter: int) -> int:
    """Uniform 64-bit output for one counter under a precomputed base."""
    return mix64((base + (counter & MASK64) * GOLDEN) & MASK64)


def prf64_array(base: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized ``prf64`` over a uint64 counter array."""
    z = np.asarray(counters, dtype=np.uint64) * np.uint64(GOLDEN) + np.uint64(base)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def probability_threshold(p: float) -> int:
    """Acceptance threshold for probability ``p``.

    An event fires iff the 64-bit PRF output is strictly below
    ``floor(p * 2**64)``, so p = 0 never fires and p = 1 always fires.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return int(p * 2.0**64)


def derive_seed(base_seed: int, index: int) -> int:
    """Per-trial seed for experiment batteries: PRF of the trial index."""
    return prf64(stream_base(base_seed, 0), index)
