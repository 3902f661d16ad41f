"""Textbook RSA with seeded key generation.

Unpadded on purpose: ``enc(a) * enc(b) = enc(a * b) mod n``, which is the
lever the key-substitution attack pulls. OAEP helpers are provided for the
padded comparison mode.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import NamedTuple

import gmpy2

from ..errors import InputTooLarge, PaddingError
from ..seeding import rng
from . import ops
from .digest import Digest

DEFAULT_E = 0x010001
MIN_BITS, MAX_BITS = 64, 2048


class PublicKey(NamedTuple):
    n: int
    e: int

    @property
    def size(self) -> int:
        """Modulus length in bytes."""
        return (self.n.bit_length() + 7) // 8


class PrivateKey(NamedTuple):
    n: int
    d: int


@dataclass(frozen=True)
class AsymmetricKeyPair:
    modulus_n: int
    public_e: int
    private_d: int
    bit_length: int

    @property
    def public(self) -> PublicKey:
        return PublicKey(self.modulus_n, self.public_e)

    @property
    def private(self) -> PrivateKey:
        return PrivateKey(self.modulus_n, self.private_d)

    def __repr__(self) -> str:
        return f"AsymmetricKeyPair(n=0x{self.modulus_n:x}, e={self.public_e}, bits={self.bit_length})"


def _prime(r, bits: int, e: int) -> int:
    while True:
        candidate = r.getrandbits(bits) | (3 << (bits - 2)) | 1
        p = int(gmpy2.next_prime(candidate))
        if p.bit_length() == bits and math.gcd(e, p - 1) == 1:
            return p


def keygen_rsa(rng_seed: int, bit_length: int = 512) -> AsymmetricKeyPair:
    if not MIN_BITS <= bit_length <= MAX_BITS:
        raise ValueError(f"bit_length must be in [{MIN_BITS}, {MAX_BITS}], got {bit_length}")
    r = rng(rng_seed, "rsa", bit_length)
    e = DEFAULT_E
    half = bit_length // 2
    while True:
        p = _prime(r, half, e)
        q = _prime(r, bit_length - half, e)
        if p == q:
            continue
        lam = math.lcm(p - 1, q - 1)
        d = pow(e, -1, lam)
        n = p * q
        probe = 2 + r.getrandbits(32) % (n - 3)
        if pow(pow(probe, e, n), d, n) == probe:
            return AsymmetricKeyPair(n, e, d, bit_length)


def rsa_encrypt_int(pub: PublicKey | tuple[int, int], m: int) -> int:
    n, e = pub
    if not 0 <= m < n:
        raise InputTooLarge(f"message must satisfy 0 <= m < n ({n.bit_length()}-bit modulus)")
    ops.tick("rsa_enc")
    return pow(m, e, n)


def rsa_decrypt_int(priv: PrivateKey | tuple[int, int], c: int) -> int:
    n, d = priv
    if not 0 <= c < n:
        raise InputTooLarge(f"ciphertext must satisfy 0 <= c < n ({n.bit_length()}-bit modulus)")
    ops.tick("rsa_dec")
    return pow(c, d, n)


def sign_digest(priv: PrivateKey, digest: Digest) -> int:
    return rsa_decrypt_int(priv, int.from_bytes(digest.bytes, "big"))


def verify_digest(pub: PublicKey, digest: Digest, signature: int) -> bool:
    if not 0 <= signature < pub.n:
        return False
    return rsa_encrypt_int(pub, signature) == int.from_bytes(digest.bytes, "big")


# OAEP (SHA-1, MGF1). SHA-1 keeps the overhead at 42 bytes so a 512-bit
# modulus can still carry a 16-byte session key.

_H = hashlib.sha1
_HLEN = 20


def _mgf1(seed: bytes, length: int) -> bytes:
    out = b""
    counter = 0
    while len(out) < length:
        out += _H(seed + counter.to_bytes(4, "big")).digest()
        counter += 1
    return out[:length]


def oaep_encode(message: bytes, k: int, seed: bytes) -> int:
    if len(message) > k - 2 * _HLEN - 2:
        raise InputTooLarge(f"OAEP message of {len(message)} bytes does not fit a {k}-byte modulus")
    if len(seed) != _HLEN:
        raise ValueError("OAEP seed must be 20 bytes")
    db = _H(b"").digest() + bytes(k - len(message) - 2 * _HLEN - 2) + b"\x01" + message
    masked_db = bytes(a ^ b for a, b in zip(db, _mgf1(seed, len(db))))
    masked_seed = bytes(a ^ b for a, b in zip(seed, _mgf1(masked_db, _HLEN)))
    return int.from_bytes(b"\x00" + masked_seed + masked_db, "big")


def oaep_decode(m: int, k: int) -> bytes:
    if m.bit_length() > 8 * k:
        raise PaddingError("decoding error")
    em = m.to_bytes(k, "big")
    masked_seed, masked_db = em[1 : 1 + _HLEN], em[1 + _HLEN :]
    seed = bytes(a ^ b for a, b in zip(masked_seed, _mgf1(masked_db, _HLEN)))
    db = bytes(a ^ b for a, b in zip(masked_db, _mgf1(seed, len(masked_db))))
    rest = db[_HLEN:].lstrip(b"\x00")
    if em[0] != 0 or db[:_HLEN] != _H(b"").digest() or not rest or rest[0] != 1:
        raise PaddingError("decoding error")
    return rest[1:]
