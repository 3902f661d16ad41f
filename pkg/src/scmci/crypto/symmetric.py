"""Session keys and the deterministic block-cipher layer.

The cipher is AES in CBC chaining with a zero IV, so identical inputs give
identical ciphertexts. That makes byte histograms reproducible; it is
analysis-grade, not confidentiality-grade.

Ciphertext layout: one clear header byte holding the pad length (0..15),
then the CBC output of ``plaintext || zero padding``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .. import kernels
from ..errors import MalformedCiphertext
from ..ids import Participant
from ..seeding import rng
from . import ops

BLOCK = 16
KEY_LENGTHS = (16, 24, 32)


class KeyId(str, Enum):
    SK1 = "SK1"
    SK2 = "SK2"
    SK3 = "SK3"
    SK4 = "SK4"
    SK5 = "SK5"
    # per-message key of the hybrid baseline; not part of any lookup table
    SESSION = "SESSION"

    @property
    def code(self) -> int:
        return list(KeyId).index(self) + 1

    @classmethod
    def from_code(cls, code: int) -> "KeyId":
        members = list(cls)
        if not 1 <= code <= len(members):
            raise ValueError(f"unknown key id code {code}")
        return members[code - 1]


KEY_PAIRS: dict[KeyId, tuple[Participant, Participant]] = {
    KeyId.SK1: (Participant.C, Participant.M),
    KeyId.SK2: (Participant.M, Participant.PG),
    KeyId.SK3: (Participant.CB, Participant.PG),
    KeyId.SK4: (Participant.MB, Participant.PG),
    KeyId.SK5: (Participant.C, Participant.PG),
}


@dataclass(frozen=True)
class SymmetricKey:
    key_id: KeyId
    pair: tuple[Participant, Participant]
    bytes: bytes

    def __post_init__(self):
        if len(self.bytes) not in KEY_LENGTHS:
            raise ValueError(f"key length must be one of {KEY_LENGTHS}, got {len(self.bytes)}")
        expected = KEY_PAIRS.get(self.key_id)
        if expected is not None and tuple(self.pair) != expected:
            raise ValueError(f"{self.key_id.value} belongs to {expected}, not {self.pair}")

    def __repr__(self) -> str:
        # keep secrets out of logs and assertion messages
        return f"SymmetricKey({self.key_id.value}, {self.pair[0].name}-{self.pair[1].name}, {len(self.bytes) * 8} bit)"


def keygen_symmetric(
    rng_seed: int,
    key_id: KeyId | str,
    pair: tuple[Participant, Participant] | None = None,
    length: int = 16,
) -> SymmetricKey:
    key_id = KeyId(key_id)
    if pair is None:
        pair = KEY_PAIRS[key_id]
    r = rng(rng_seed, "symmetric", key_id.value, int(pair[0]), int(pair[1]))
    return SymmetricKey(key_id, tuple(pair), r.randbytes(length))


def _as_array(data: bytes) -> np.ndarray:
    return np.frombuffer(data, dtype=np.uint8)


def sym_encrypt(key: SymmetricKey, plaintext: bytes) -> bytes:
    ops.tick("sym_enc")
    pad = -len(plaintext) % BLOCK
    body = bytes(plaintext) + bytes(pad)
    out = kernels.cbc_encrypt(_as_array(body), kernels.expand_key(key.bytes)) if body else b""
    return bytes([pad]) + bytes(out)


def sym_decrypt(key: SymmetricKey, ciphertext: bytes) -> bytes:
    ops.tick("sym_dec")
    if len(ciphertext) < 1 or (len(ciphertext) - 1) % BLOCK:
        raise MalformedCiphertext(f"bad ciphertext length {len(ciphertext)}")
    pad = ciphertext[0]
    body = ciphertext[1:]
    if pad >= BLOCK or pad > len(body):
        raise MalformedCiphertext(f"bad pad header {pad}")
    if not body:
        return b""
    plain = bytes(kernels.cbc_decrypt(_as_array(body), kernels.expand_key(key.bytes)))
    if pad and any(plain[-pad:]):
        raise MalformedCiphertext("bad padding")
    return plain[: len(plain) - pad]
