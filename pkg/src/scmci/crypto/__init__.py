"""Self-contained primitives: block cipher, textbook RSA, digests, envelopes."""

from .digest import Digest, HashAlg, dual_digest, hash, link_digests
from .envelope import DigitalEnvelope, open_envelope, seal_envelope
from .ops import counting, public_key_ops
from .rsa import (
    AsymmetricKeyPair,
    PrivateKey,
    PublicKey,
    keygen_rsa,
    oaep_decode,
    oaep_encode,
    rsa_decrypt_int,
    rsa_encrypt_int,
    sign_digest,
    verify_digest,
)
from .symmetric import KEY_PAIRS, KeyId, SymmetricKey, keygen_symmetric, sym_decrypt, sym_encrypt

__all__ = [
    "AsymmetricKeyPair",
    "Digest",
    "DigitalEnvelope",
    "HashAlg",
    "KEY_PAIRS",
    "KeyId",
    "PrivateKey",
    "PublicKey",
    "SymmetricKey",
    "counting",
    "dual_digest",
    "hash",
    "keygen_rsa",
    "keygen_symmetric",
    "link_digests",
    "oaep_decode",
    "oaep_encode",
    "open_envelope",
    "public_key_ops",
    "rsa_decrypt_int",
    "rsa_encrypt_int",
    "seal_envelope",
    "sign_digest",
    "sym_decrypt",
    "sym_encrypt",
    "verify_digest",
]
