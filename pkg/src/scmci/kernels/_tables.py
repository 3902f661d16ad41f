"""AES lookup tables and key schedule, shared by both kernel backends."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def _gf_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a = ((a << 1) ^ 0x1B) & 0xFF if a & 0x80 else a << 1
        b >>= 1
    return out


def _build_sbox() -> tuple[np.ndarray, np.ndarray]:
    sbox = [0] * 256
    p = q = 1
    # walk the multiplicative group with generator 3; q tracks the inverse of p
    while True:
        p = p ^ ((p << 1) & 0xFF) ^ (0x1B if p & 0x80 else 0)
        q ^= q << 1
        q ^= q << 2
        q ^= q << 4
        q &= 0xFF
        if q & 0x80:
            q ^= 0x09
        rot = lambda x, s: ((x << s) | (x >> (8 - s))) & 0xFF  # noqa: E731
        sbox[p] = q ^ rot(q, 1) ^ rot(q, 2) ^ rot(q, 3) ^ rot(q, 4) ^ 0x63
        if p == 1:
            break
    sbox[0] = 0x63
    inv = [0] * 256
    for i, v in enumerate(sbox):
        inv[v] = i
    return np.array(sbox, dtype=np.uint8), np.array(inv, dtype=np.uint8)


SBOX, INV_SBOX = _build_sbox()
MUL2, MUL3, MUL9, MUL11, MUL13, MUL14 = (
    np.array([_gf_mul(x, k) for x in range(256)], dtype=np.uint8)
    for k in (2, 3, 9, 11, 13, 14)
)

# state byte i sits at column i // 4, row i % 4
SHIFT_ROWS = np.array([4 * ((i // 4 + i % 4) % 4) + i % 4 for i in range(16)], dtype=np.intp)
INV_SHIFT_ROWS = np.array([4 * ((i // 4 - i % 4) % 4) + i % 4 for i in range(16)], dtype=np.intp)

_RCON = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36]


@lru_cache(maxsize=256)
def expand_key(key: bytes) -> np.ndarray:
    """Return the AES round keys for ``key`` as a read-only ``(rounds + 1, 16)`` uint8 array."""
    if len(key) not in (16, 24, 32):
        raise ValueError(f"AES key must be 16, 24 or 32 bytes, got {len(key)}")
    nk = len(key) // 4
    nr = nk + 6
    words = [list(key[4 * i : 4 * i + 4]) for i in range(nk)]
    for i in range(nk, 4 * (nr + 1)):
        temp = list(words[i - 1])
        if i % nk == 0:
            temp = temp[1:] + temp[:1]
            temp = [int(SBOX[b]) for b in temp]
            temp[0] ^= _RCON[i // nk - 1]
        elif nk > 6 and i % nk == 4:
            temp = [int(SBOX[b]) for b in temp]
        words.append([a ^ b for a, b in zip(words[i - nk], temp)])
    rk = np.array(words, dtype=np.uint8).reshape(nr + 1, 16)
    rk.setflags(write=False)
    return rk
