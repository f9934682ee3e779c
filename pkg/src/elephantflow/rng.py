"""Deterministic seed derivation.

Every randomized stage derives its own 64-bit seed from the single master
seed with a splitmix64 chain keyed by stage labels: strings are folded to
64 bits through SHA-256, integers are used as-is. Adding a stage or index
never perturbs the streams of the others, and the derivation is independent
of process or thread layout.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _token(part: int | str) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & _MASK64
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big")
    raise TypeError(f"seed path parts must be int or str, got {type(part).__name__}")


def derive_seed(master: int, *path: int | str) -> int:
    """Derive a sub-seed from `master` for the stage identified by `path`."""
    state = _splitmix64(int(master) & _MASK64)
    for part in path:
        state = _splitmix64(state ^ _token(part))
    return state


def generator(seed: int, *path: int | str) -> np.random.Generator:
    """PCG64 generator for `seed`, optionally derived down a stage path."""
    if path:
        seed = derive_seed(seed, *path)
    return np.random.Generator(np.random.PCG64(seed))
