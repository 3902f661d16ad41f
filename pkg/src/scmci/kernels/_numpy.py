"""Pure-numpy kernels. Block operations are vectorised across blocks."""

from __future__ import annotations

import numpy as np

from ._tables import (
    INV_SBOX,
    INV_SHIFT_ROWS,
    MUL2,
    MUL3,
    MUL9,
    MUL11,
    MUL13,
    MUL14,
    SBOX,
    SHIFT_ROWS,
)


def _mix_columns(s: np.ndarray) -> np.ndarray:
    c = s.reshape(-1, 4, 4)
    r1 = np.roll(c, -1, axis=2)
    r2 = np.roll(c, -2, axis=2)
    r3 = np.roll(c, -3, axis=2)
    return (MUL2[c] ^ MUL3[r1] ^ r2 ^ r3).reshape(-1, 16)


def _inv_mix_columns(s: np.ndarray) -> np.ndarray:
    c = s.reshape(-1, 4, 4)
    r1 = np.roll(c, -1, axis=2)
    r2 = np.roll(c, -2, axis=2)
    r3 = np.roll(c, -3, axis=2)
    return (MUL14[c] ^ MUL11[r1] ^ MUL13[r2] ^ MUL9[r3]).reshape(-1, 16)


def encrypt_blocks(blocks: np.ndarray, round_keys: np.ndarray) -> np.ndarray:
    nr = round_keys.shape[0] - 1
    s = blocks ^ round_keys[0]
    for r in range(1, nr):
        s = _mix_columns(SBOX[s][:, SHIFT_ROWS]) ^ round_keys[r]
    return SBOX[s][:, SHIFT_ROWS] ^ round_keys[nr]


def decrypt_blocks(blocks: np.ndarray, round_keys: np.ndarray) -> np.ndarray:
    nr = round_keys.shape[0] - 1
    s = blocks ^ round_keys[nr]
    for r in range(nr - 1, 0, -1):
        s = _inv_mix_columns(INV_SBOX[s[:, INV_SHIFT_ROWS]] ^ round_keys[r])
    return INV_SBOX[s[:, INV_SHIFT_ROWS]] ^ round_keys[0]


def cbc_encrypt(data: np.ndarray, round_keys: np.ndarray) -> np.ndarray:
    blocks = data.reshape(-1, 16)
    out = np.empty_like(blocks)
    prev = np.zeros((1, 16), dtype=np.uint8)
    for i in range(blocks.shape[0]):
        prev = encrypt_blocks(blocks[i : i + 1] ^ prev, round_keys)
        out[i] = prev[0]
    return out.reshape(-1)


def cbc_decrypt(data: np.ndarray, round_keys: np.ndarray) -> np.ndarray:
    blocks = data.reshape(-1, 16)
    if blocks.shape[0] == 0:
        return data.copy()
    plain = decrypt_blocks(blocks, round_keys)
    plain[1:] ^= blocks[:-1]
    return plain.reshape(-1)


def byte_histogram(data: np.ndarray) -> np.ndarray:
    return np.bincount(data, minlength=256).astype(np.int64)
