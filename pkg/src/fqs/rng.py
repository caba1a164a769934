"""Deterministic random streams.

Every stochastic operation in the package draws from a Philox counter-based
generator.  Independent sub-streams are derived from a user seed and a
string tag (plus optional integer indices) by hashing the tuple with
BLAKE2b and using the 128-bit digest as the Philox key.  The derivation is
pure arithmetic, so the same (seed, tag, indices) always yields the same
stream on every platform and regardless of call order or thread count.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_key(seed: int, tag: str, *indices: int) -> int:
    """128-bit Philox key for the sub-stream named by (seed, tag, indices)."""
    h = hashlib.blake2b(digest_size=16)
    h.update((int(seed) & _MASK64).to_bytes(8, "little"))
    h.update(tag.encode("utf-8"))
    for ix in indices:
        h.update(b"\x00")
        h.update(int(ix).to_bytes(8, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


def substream(seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Generator for the sub-stream named by (seed, tag, indices)."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, tag, *indices)))
