"""Named sub-seeds derived from one root seed."""

from __future__ import annotations

import hashlib
import random

U64 = (1 << 64) - 1


def derive_seed(seed: int, *labels: object) -> int:
    """Deterministic 64-bit child seed of ``seed`` for the given label path."""
    h = hashlib.sha256(str(seed & U64).encode())
    for label in labels:
        h.update(b"/" + str(label).encode())
    return int.from_bytes(h.digest()[:8], "big")


def rng(seed: int, *labels: object) -> random.Random:
    return random.Random(derive_seed(seed, *labels))
