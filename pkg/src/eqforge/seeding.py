"""Deterministic derivation of per-record RNG streams from a master seed.

Every generated record gets its own ``random.Random`` seeded from
(master seed, stream name, index), so records are reproducible independently
of generation order or worker count.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(master: int, stream: str, index: int = 0) -> int:
    """Stable 63-bit child seed for a named stream."""
    key = f"{master}:{stream}:{index}".encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def derive_rng(master: int, stream: str, index: int = 0) -> random.Random:
    return random.Random(derive_seed(master, stream, index))
