"""Deterministic RNG stream derivation.

Every stochastic component draws from a ``numpy.random.Generator`` derived
by hashing a tuple of labels (global seed, scenario id, rollout index, ...).
Hash derivation prevents accidental stream reuse between scenarios, rollout
repetitions, and experiment-matrix cells, and makes any sub-computation
reproducible in isolation.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_key(*parts) -> int:
    """Hash arbitrary label parts into a 128-bit integer key."""
    joined = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(joined.encode("utf-8"), digest_size=16).digest()
    return int.from_bytes(digest, "little")


def derive_rng(*parts) -> np.random.Generator:
    """Independent generator for the stream labeled by ``parts``."""
    return np.random.Generator(np.random.PCG64(derive_key(*parts)))
