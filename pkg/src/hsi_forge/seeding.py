"""Stable seed derivation: scheduling-independent reproducibility."""

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """64-bit seed from any hashable parts; stable across runs and platforms."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def rng_from(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
