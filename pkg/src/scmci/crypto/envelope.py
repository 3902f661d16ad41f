from __future__ import annotations

from dataclasses import dataclass

from ..errors import InputTooLarge, KeyTooLargeForModulus, WrongRecipient
from ..ids import Participant
from .rsa import PrivateKey, PublicKey, rsa_decrypt_int, rsa_encrypt_int
from .symmetric import KeyId, SymmetricKey


@dataclass(frozen=True)
class DigitalEnvelope:
    """A session key sealed under the recipient's public key.

    Only ``sealed_key`` is an RSA ciphertext. ``key_id``, ``pair`` and
    ``key_length`` ride in the clear in the enclosing wire message.
    """

    recipient: Participant
    sealed_key: int
    key_id: KeyId
    pair: tuple[Participant, Participant]
    key_length: int = 16


def seal_envelope(recipient_cert, key: SymmetricKey) -> DigitalEnvelope:
    """Seal ``key`` for the subject of ``recipient_cert`` (anything with ``subject`` and ``public_key``)."""
    pub = PublicKey(*recipient_cert.public_key)
    if 8 * len(key.bytes) >= pub.n.bit_length():
        raise KeyTooLargeForModulus(
            f"{8 * len(key.bytes)}-bit key does not fit a {pub.n.bit_length()}-bit modulus"
        )
    sealed = rsa_encrypt_int(pub, int.from_bytes(key.bytes, "big"))
    return DigitalEnvelope(Participant(recipient_cert.subject), sealed, key.key_id, key.pair, len(key.bytes))


def open_envelope(priv: PrivateKey | tuple[int, int], env: DigitalEnvelope) -> SymmetricKey:
    try:
        m = rsa_decrypt_int(priv, env.sealed_key)
    except InputTooLarge as exc:
        raise WrongRecipient(str(exc)) from exc
    if m >> (8 * env.key_length):
        raise WrongRecipient("opened value exceeds the declared key length")
    return SymmetricKey(env.key_id, tuple(env.pair), m.to_bytes(env.key_length, "big"))
