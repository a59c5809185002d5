"""Deterministic hashing and seed derivation.

Everything stochastic in this package bottoms out here: a 64-bit FNV-1a
hash of identifier strings, a splitmix64 mixer used as a one-shot hash
of 64-bit values, and named sub-streams derived from a single root seed
so that components stay reproducible independently of each other.

All arithmetic is plain Python integers masked to 64 bits; no numpy
state is involved, so two processes (or two implementations in two
languages) agree bit for bit.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

# golden-ratio increment of the splitmix64 reference generator
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def fnv1a64(data: bytes | str) -> int:
    """64-bit FNV-1a over ``data`` (strings are UTF-8 encoded)."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def splitmix64(x: int) -> int:
    """One full splitmix64 step for state ``x``: increment, then finalize.

    This is next() of the reference generator seeded at ``x``, used here
    as a stateless mixer.
    """
    z = (x + SPLITMIX_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def unit_float(x: int) -> float:
    """Map a 64-bit integer to a float64 in [0, 1) using the top 53 bits."""
    return (x >> 11) / 9007199254740992.0  # 2**53


def derive_seed(root: int, name: str) -> int:
    """64-bit seed for the named sub-stream of ``root``."""
    return splitmix64((root ^ fnv1a64(name)) & MASK64)


def substream(root: int, name: str) -> np.random.Generator:
    """Independent numpy generator for the named sub-stream of ``root``."""
    return np.random.default_rng(derive_seed(root, name))
