"""Per-message hybrid encryption: the comparison protocol.

Every message carries a fresh session key sealed under the recipient's
textbook-RSA key, plus the body encrypted under that session key. The
receiver's accept/reject reaction is visible on the wire (an ABORT frame
goes back on reject), and that reaction is the validity oracle the
adversary drives.

Body layout before encryption::

    MAGIC (4) | u32 length | message | MD5(message)

A session key of ``key_bits`` bits is used as a 16-byte AES key with
leading zero bytes. The receiver keeps only the low ``key_bits`` bits of
the opened RSA value; that is the modeling choice which turns
multiplicative malleability into a per-bit oracle.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .crypto import (
    HashAlg,
    KeyId,
    PrivateKey,
    PublicKey,
    SymmetricKey,
    hash as digest_of,
    oaep_decode,
    oaep_encode,
    rsa_decrypt_int,
    rsa_encrypt_int,
    sym_decrypt,
    sym_encrypt,
)
from .crypto.ops import counting
from .errors import CryptoError, WireError
from .ids import Participant
from .seeding import rng
from .wire import MsgType, Transcript, WireMessage, bytes_to_int, int_to_bytes, pack_fields, unpack_fields

MAGIC = b"HYB1"
AES_KEY_BYTES = 16


class Padding(str, Enum):
    NONE = "none"
    OAEP = "oaep"


class Verdict(str, Enum):
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"
    # the receiver tore the whole session down rather than answering
    ABORT = "ABORT"


@dataclass(frozen=True)
class HybridFrame:
    sealed_session_key: int
    body: bytes
    key_bits: int = 128
    padding: Padding = Padding.NONE

    def to_bytes(self, modulus_bytes: int | None = None) -> bytes:
        meta = struct.pack(">HB", self.key_bits, 1 if self.padding is Padding.OAEP else 0)
        return pack_fields(meta, int_to_bytes(self.sealed_session_key, modulus_bytes), self.body)

    @classmethod
    def from_bytes(cls, data: bytes) -> "HybridFrame":
        meta, sealed, body = unpack_fields(data, 3)
        if len(meta) != 3:
            raise WireError("bad hybrid frame metadata")
        key_bits, pad = struct.unpack(">HB", meta)
        if not 1 <= key_bits <= 8 * AES_KEY_BYTES or pad > 1:
            raise WireError("bad hybrid frame metadata")
        return cls(bytes_to_int(sealed), body, key_bits, Padding.OAEP if pad else Padding.NONE)


def session_key(value: int) -> SymmetricKey:
    return SymmetricKey(KeyId.SESSION, (Participant.C, Participant.M), value.to_bytes(AES_KEY_BYTES, "big"))


def wrap_body(message: bytes) -> bytes:
    return MAGIC + struct.pack(">I", len(message)) + message + digest_of(HashAlg.MD5, message).bytes


def unwrap_body(plain: bytes) -> bytes | None:
    """Inverse of :func:`wrap_body`; ``None`` when the structure does not parse."""
    if len(plain) < 8 + 16 or plain[:4] != MAGIC:
        return None
    (n,) = struct.unpack(">I", plain[4:8])
    if len(plain) != 8 + n + 16:
        return None
    message, tag = plain[8 : 8 + n], plain[8 + n :]
    if digest_of(HashAlg.MD5, message).bytes != tag:
        return None
    return message


def fresh_session_key(rng_seed: int, key_bits: int = 128) -> int:
    return rng(rng_seed, "baseline-session-key", key_bits).getrandbits(key_bits)


def seal_session_key(pub: PublicKey, key: int, key_bits: int, padding: Padding, rng_seed: int = 0) -> int:
    if padding is Padding.OAEP:
        k = pub.size
        seed = rng(rng_seed, "oaep-seed").randbytes(20)
        return rsa_encrypt_int(pub, oaep_encode(key.to_bytes((key_bits + 7) // 8, "big"), k, seed))
    return rsa_encrypt_int(pub, key)


def baseline_send(
    sender: Participant,
    recipient_cert,
    plaintext: bytes,
    rng_seed: int,
    key_bits: int = 128,
    session_key_value: int | None = None,
    padding: Padding | str = Padding.NONE,
) -> HybridFrame:
    """Seal a fresh session key for the recipient and encrypt ``plaintext`` under it.

    ``session_key_value`` overrides the seeded key (used to plant a known key).
    ``sender`` only matters to the wire header and is accepted for symmetry.
    """
    padding = Padding(padding)
    if not 1 <= key_bits <= 8 * AES_KEY_BYTES:
        raise ValueError(f"key_bits must be in 1..128, got {key_bits}")
    pub = PublicKey(*recipient_cert.public_key)
    s = fresh_session_key(rng_seed, key_bits) if session_key_value is None else session_key_value
    if s >> key_bits:
        raise ValueError("session key wider than key_bits")
    sealed = seal_session_key(pub, s, key_bits, padding, rng_seed)
    return HybridFrame(sealed, sym_encrypt(session_key(s), wrap_body(plaintext)), key_bits, padding)


class Received(NamedTuple):
    verdict: Verdict
    plaintext: bytes | None = None


def open_session_key(priv: PrivateKey, frame: HybridFrame) -> int:
    """Recover the session key value exactly as the receiver does. Raises on failure."""
    m = rsa_decrypt_int(priv, frame.sealed_session_key)
    if frame.padding is Padding.OAEP:
        k = (priv.n.bit_length() + 7) // 8
        raw = oaep_decode(m, k)
        if len(raw) != (frame.key_bits + 7) // 8:
            raise CryptoError("session key length mismatch")
        return int.from_bytes(raw, "big")
    return m & ((1 << frame.key_bits) - 1)


def baseline_receive(recipient_priv: PrivateKey | tuple[int, int], frame: HybridFrame) -> Received:
    """Open, decrypt and parse. Every failure becomes a REJECT verdict."""
    priv = PrivateKey(*recipient_priv)
    try:
        key = open_session_key(priv, frame)
        plain = sym_decrypt(session_key(key), frame.body)
    except CryptoError:
        return Received(Verdict.REJECT)
    message = unwrap_body(plain)
    if message is None:
        return Received(Verdict.REJECT)
    return Received(Verdict.ACCEPT, message)


class BaselineReceiver:
    """Bus handler. No sequence tracking: the baseline has no replay guard."""

    def __init__(self, pid: Participant, priv: PrivateKey, counter=None):
        self.pid = pid
        self.priv = priv
        self.counter = counter
        self.accepted: list[tuple[WireMessage, bytes]] = []
        self.rejected: list[WireMessage] = []

    def handle(self, msg: WireMessage, bus) -> None:
        if msg.msg_type is not MsgType.BASELINE_HYBRID:
            return
        with counting(self.counter):
            try:
                result = baseline_receive(self.priv, HybridFrame.from_bytes(msg.payload))
            except WireError:
                result = Received(Verdict.REJECT)
        if result.verdict is Verdict.ACCEPT:
            self.accepted.append((msg, result.plaintext))
            return
        self.rejected.append(msg)
        if bus.is_registered(msg.sender):
            bus.send(WireMessage(MsgType.ABORT, self.pid, msg.sender, msg.seq, b"REJECT"))


class BaselineSession:
    """Customer sending hybrid frames to merchant and gateway over a bus.

    Reuses a :class:`~scmci.protocol.Deployment` for key pairs so both
    protocols run against the same long-term keys.
    """

    def __init__(self, deployment, hook=None, key_bits: int = 128, padding: Padding | str = Padding.NONE):
        from collections import Counter

        from .netsim import Bus

        self.deployment = deployment
        self.key_bits = key_bits
        self.padding = Padding(padding)
        self.bus = Bus(hook)
        self.counter = Counter()
        self.receivers = {
            pid: BaselineReceiver(pid, deployment.identities[pid].keypair.private, self.counter)
            for pid in (Participant.M, Participant.PG)
        }
        for pid, rx in self.receivers.items():
            self.bus.register(pid, rx)
        self.customer_inbox: list[WireMessage] = []
        self.bus.register(Participant.C, lambda msg, bus: self.customer_inbox.append(msg))
        self.trudy_inbox: list[WireMessage] = []
        self.bus.register(Participant.TRUDY, lambda msg, bus: self.trudy_inbox.append(msg))
        self._seq = 0
        self.messages_sent = 0

    @property
    def transcript(self) -> Transcript:
        return self.bus.transcript

    def send(self, to: Participant, plaintext: bytes, label: str = "", session_key_value: int | None = None) -> WireMessage:
        cert = self.deployment.identities[to].cert
        seed = self.deployment.purchase_seed
        self._seq += 1
        with counting(self.counter):
            frame = baseline_send(
                Participant.C,
                cert,
                plaintext,
                rng(seed, "baseline", label, self._seq).getrandbits(64),
                self.key_bits,
                session_key_value,
                self.padding,
            )
        msg = WireMessage(MsgType.BASELINE_HYBRID, Participant.C, to, self._seq, frame.to_bytes(cert.public_key.size))
        self.bus.send(msg)
        self.bus.run_until_idle()
        self.messages_sent += 1
        return msg

    def run(self, os, pd) -> dict[Participant, bytes]:
        """Order summary to the merchant, purchase details to the gateway."""
        self.send(Participant.M, os.to_bytes(), "order")
        self.send(Participant.PG, pd.to_bytes(), "payment")
        return {pid: rx.accepted[-1][1] for pid, rx in self.receivers.items() if rx.accepted}

    def replay(self, msg: WireMessage) -> bool:
        """Re-inject ``msg``; True when the receiver accepted it again."""
        rx = self.receivers[Participant(msg.receiver)]
        before = len(rx.accepted)
        self.bus.inject(msg)
        self.bus.run_until_idle()
        return len(rx.accepted) > before
