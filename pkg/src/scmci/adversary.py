"""Trudy: capture a sealed session key and try to recover it one bit at a time.

The attack is multiplicative malleability of unpadded RSA. For a k-bit key
``s`` sealed as ``c = s^e mod n`` with ``n >= 2^(2k)``, the frame
``c * (2^j)^e`` opens to ``s << j`` with no modular wrap. A receiver that
keeps the low k bits therefore sees ``(s mod 2^(k-j)) << j``. Fixing
``j = k-1-i`` isolates bit ``i`` on top of the already known lower bits;
Trudy encrypts a probe body under the candidate with bit ``i = 0`` and
reads the verdict. Query budget: one calibration, k bit probes, one
confirmation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable

from .baseline import (
    BaselineSession,
    HybridFrame,
    Padding,
    Verdict,
    baseline_receive,
    session_key,
    unwrap_body,
    wrap_body,
)
from .crypto import PrivateKey, PublicKey, sym_decrypt, sym_encrypt
from .errors import CryptoError, ProtocolError, WireError
from .ids import Participant
from .protocol.participants import decode_envelope, encode_envelope
from .wire import MsgType, Transcript, WireMessage

PROBE_MESSAGE = b"probe"

Oracle = Callable[[WireMessage], Verdict]


class Reason(str, Enum):
    NO_TARGET = "NO_TARGET"
    NO_ITERATIVE_ORACLE = "NO_ITERATIVE_ORACLE"
    CALIBRATION_FAILED = "CALIBRATION_FAILED"
    CONFIRMATION_FAILED = "CONFIRMATION_FAILED"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"
    MODULUS_TOO_SMALL = "MODULUS_TOO_SMALL"


@dataclass(frozen=True)
class Candidate:
    index: int
    message: WireMessage

    @property
    def kind(self) -> str:
        return "hybrid" if self.message.msg_type is MsgType.BASELINE_HYBRID else "envelope"


def capture(transcript: Transcript | Iterable[WireMessage]) -> list[Candidate]:
    """Every frame that carries an RSA-sealed session key."""
    msgs = transcript.messages() if isinstance(transcript, Transcript) else list(transcript)
    keep = (MsgType.BASELINE_HYBRID, MsgType.ENVELOPE)
    return [Candidate(i, m) for i, m in enumerate(msgs) if m.msg_type in keep]


def sealed_value(msg: WireMessage) -> int:
    if msg.msg_type is MsgType.BASELINE_HYBRID:
        return HybridFrame.from_bytes(msg.payload).sealed_session_key
    return decode_envelope(msg.payload).sealed_key


def key_bits_of(msg: WireMessage) -> int:
    if msg.msg_type is MsgType.BASELINE_HYBRID:
        return HybridFrame.from_bytes(msg.payload).key_bits
    return 8 * decode_envelope(msg.payload).key_length


def forge(target: WireMessage, sealed: int, candidate: int | None, modulus_bytes: int) -> WireMessage:
    """Copy of ``target`` with the sealed key replaced.

    For hybrid frames with a ``candidate`` key the body is re-encrypted under
    that candidate so the receiver's verdict reveals whether it matches.
    """
    if target.msg_type is MsgType.BASELINE_HYBRID:
        frame = HybridFrame.from_bytes(target.payload)
        body = frame.body if candidate is None else sym_encrypt(session_key(candidate), wrap_body(PROBE_MESSAGE))
        payload = replace(frame, sealed_session_key=sealed, body=body).to_bytes(modulus_bytes)
    else:
        env = replace(decode_envelope(target.payload), sealed_key=sealed)
        payload = encode_envelope(env, modulus_bytes)
    return replace(target, payload=payload)


@dataclass
class AttackState:
    target_frame: WireMessage
    recipient_pub: PublicKey
    key_bits: int
    recovered_bits: list[int] = field(default_factory=list)
    query_count: int = 0
    log: list[dict] = field(default_factory=list)

    @property
    def budget(self) -> int:
        return self.key_bits + 2

    @classmethod
    def for_target(cls, target: WireMessage, recipient_pub) -> "AttackState":
        return cls(target, PublicKey(*recipient_pub), key_bits_of(target))

    def recovered_key(self) -> int:
        return sum(b << i for i, b in enumerate(self.recovered_bits))


@dataclass(frozen=True)
class AttackOutcome:
    recovered: bool
    query_count: int
    budget: int
    key: int | None = None
    reason: Reason | None = None
    key_bits: int = 0
    log: tuple[dict, ...] = ()

    @property
    def status(self) -> str:
        return "RECOVERED" if self.recovered else f"FAILED({self.reason.value})"

    def key_hex(self) -> str | None:
        if self.key is None:
            return None
        return self.key.to_bytes(max(1, (self.key_bits + 7) // 8), "big").hex().upper()

    def to_dict(self) -> dict:
        return {
            "outcome": "RECOVERED" if self.recovered else "FAILED",
            "reason": None if self.reason is None else self.reason.value,
            "query_count": self.query_count,
            "budget": self.budget,
            "key_bits": self.key_bits,
            "recovered_key": self.key_hex(),
            "log": list(self.log),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _fail(state: AttackState, reason: Reason) -> AttackOutcome:
    return AttackOutcome(False, state.query_count, state.budget, None, reason, state.key_bits, tuple(state.log))


def run_attack_cycle(state: AttackState, oracle: Oracle) -> AttackOutcome:
    k = state.key_bits
    n, e = state.recipient_pub
    if n.bit_length() < 2 * k + 1:
        return _fail(state, Reason.MODULUS_TOO_SMALL)
    c = sealed_value(state.target_frame)
    size = state.recipient_pub.size

    def ask(kind: str, frame: WireMessage) -> Verdict | None:
        if state.query_count >= state.budget:
            return None
        state.query_count += 1
        verdict = Verdict(oracle(frame))
        state.log.append({"query": state.query_count, "kind": kind, "verdict": verdict.value})
        return verdict

    # calibration: an exact copy of the captured frame
    v = ask("copy", state.target_frame)
    if v is None:
        return _fail(state, Reason.BUDGET_EXHAUSTED)
    if v is Verdict.ABORT:
        return _fail(state, Reason.NO_ITERATIVE_ORACLE)
    if v is not Verdict.ACCEPT:
        return _fail(state, Reason.CALIBRATION_FAILED)

    for i in range(k):
        shift = k - 1 - i
        sealed = c * pow(2, shift * e, n) % n
        candidate = state.recovered_key() << shift
        v = ask(f"bit {i}", forge(state.target_frame, sealed, candidate, size))
        if v is None:
            return _fail(state, Reason.BUDGET_EXHAUSTED)
        if v is Verdict.ABORT:
            return _fail(state, Reason.NO_ITERATIVE_ORACLE)
        state.recovered_bits.append(0 if v is Verdict.ACCEPT else 1)

    key = state.recovered_key()
    v = ask("confirm", forge(state.target_frame, c, key, size))
    if v is not Verdict.ACCEPT:
        return _fail(state, Reason.CONFIRMATION_FAILED if v is not None else Reason.BUDGET_EXHAUSTED)
    if state.target_frame.msg_type is MsgType.BASELINE_HYBRID:
        try:
            body = HybridFrame.from_bytes(state.target_frame.payload).body
            if unwrap_body(sym_decrypt(session_key(key), body)) is None:
                return _fail(state, Reason.CONFIRMATION_FAILED)
        except (CryptoError, WireError):
            return _fail(state, Reason.CONFIRMATION_FAILED)
    return AttackOutcome(True, state.query_count, state.budget, key, None, k, tuple(state.log))


# oracles


def receiver_oracle(recipient_priv: PrivateKey) -> Oracle:
    """Direct call into the baseline receiver."""

    def oracle(frame: WireMessage) -> Verdict:
        try:
            return baseline_receive(recipient_priv, HybridFrame.from_bytes(frame.payload)).verdict
        except WireError:
            return Verdict.REJECT

    return oracle


class BusOracle:
    """Inject forged frames into a live baseline session and watch for ABORT replies."""

    def __init__(self, session: BaselineSession):
        self.session = session

    def __call__(self, frame: WireMessage) -> Verdict:
        bus = self.session.bus
        mark = len(bus.transcript)
        bus.inject(frame)
        bus.run_until_idle()
        for entry in bus.transcript.entries[mark:]:
            m = entry.message
            if m.msg_type is MsgType.ABORT and m.sender == frame.receiver:
                return Verdict.REJECT
        return Verdict.ACCEPT


class ScmciEnvelopeOracle:
    """Substitute a setup envelope in a fresh handshake and report whether it survived.

    Any failure aborts the handshake; the deployment then rotates its setup
    seed so every later session uses different keys.
    """

    def __init__(self, deployment, os, pd):
        self.deployment = deployment
        self.os, self.pd = os, pd
        self.sessions = 0

    def __call__(self, frame: WireMessage) -> Verdict:
        def hook(msg: WireMessage, bus) -> WireMessage:
            if msg.msg_type is MsgType.ENVELOPE and (msg.sender, msg.receiver) == (frame.sender, frame.receiver):
                return replace(msg, payload=frame.payload)
            return msg

        self.sessions += 1
        session = self.deployment.session(hook=hook)
        try:
            session.run(self.os, self.pd)
        except ProtocolError:
            self.deployment.rotate()
            return Verdict.ABORT
        return Verdict.ACCEPT


# campaigns


def attack_baseline(session: BaselineSession, oracle: Oracle | None = None) -> AttackOutcome:
    """Attack the first hybrid frame in ``session``'s transcript."""
    cands = capture(session.transcript)
    if not cands:
        return AttackOutcome(False, 0, 0, reason=Reason.NO_TARGET)
    target = cands[0].message
    pub = session.deployment.identities[target.receiver].cert.public_key
    return run_attack_cycle(AttackState.for_target(target, pub), oracle or BusOracle(session))


def attack_scmci(deployment, transcript: Transcript, os, pd) -> AttackOutcome:
    """Same cycle against the first envelope an SCMCI transcript exposes."""
    cands = capture(transcript)
    if not cands:
        return AttackOutcome(False, 0, 0, reason=Reason.NO_TARGET)
    target = cands[0].message
    pub = deployment.identities[target.receiver].cert.public_key
    return run_attack_cycle(AttackState.for_target(target, pub), ScmciEnvelopeOracle(deployment, os, pd))


def purchase_phase(transcript: Transcript) -> list[WireMessage]:
    """Frames after the last setup-phase frame."""
    msgs = transcript.messages()
    setup = (MsgType.CERT_EXCHANGE, MsgType.ENVELOPE)
    last = max((i for i, m in enumerate(msgs) if m.msg_type in setup), default=-1)
    return msgs[last + 1 :]


def replay_attack(session, frame_index: int):
    """Re-inject frame ``frame_index`` of ``session``'s own transcript.

    Works on both :class:`~scmci.protocol.Session` (returns a ReplayOutcome)
    and :class:`BaselineSession` (returns True when accepted again).
    """
    msg = session.transcript[frame_index].message
    if isinstance(session, BaselineSession):
        return session.replay(msg)
    from .protocol import replay_frame

    return replay_frame(session, msg)


__all__ = [
    "AttackOutcome",
    "AttackState",
    "BusOracle",
    "Candidate",
    "Padding",
    "Reason",
    "ScmciEnvelopeOracle",
    "Verdict",
    "attack_baseline",
    "attack_scmci",
    "capture",
    "forge",
    "purchase_phase",
    "receiver_oracle",
    "replay_attack",
    "run_attack_cycle",
]
