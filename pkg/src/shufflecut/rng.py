"""Reproducible randomness: Philox counter-based streams with derived subkeys.

Every stochastic routine takes an integer ``seed`` and derives independent
substreams per replica (or per named purpose) by mixing the indices into the
key with SplitMix64 steps.  Replica results therefore do not depend on
scheduling or on how work is batched.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def derive_key(seed: int, *indices: int) -> int:
    """Fold substream indices into a 64-bit Philox key."""
    key = _mix((seed & _MASK) + _GOLDEN)
    for ix in indices:
        key = _mix(key ^ ((ix & _MASK) * _GOLDEN & _MASK))
    return key


def make_generator(seed: int, *indices: int) -> np.random.Generator:
    """Philox generator on the substream identified by ``indices``."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, *indices)))
