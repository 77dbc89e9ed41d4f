"""Per-replicate seed derivation.

``derive_seed(master, i)`` is the SplitMix64 finaliser applied to
``master ^ (i * GOLDEN)`` modulo 2**64. Multiplication by the odd constant is a
bijection of Z/2^64 and the finaliser is a bijection too, so distinct indices
below 2**64 never collide for a fixed master seed.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def splitmix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    if index < 0:
        raise ValueError("replicate index must be nonnegative")
    return splitmix64((master & MASK64) ^ ((index * GOLDEN) & MASK64))


def replicate_rng(master: int, index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, index))
