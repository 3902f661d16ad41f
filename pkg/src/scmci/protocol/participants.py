"""The five SCMCI parties as bus-driven state machines.

A party reacts to one frame at a time. Any verification failure is caught
in :meth:`Party.handle`, recorded, and answered with an ABORT frame to the
sender; the party then ignores further traffic. Replays are the exception:
they are answered with ABORT but do not kill an otherwise healthy party.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from ..crypto import (
    AsymmetricKeyPair,
    DigitalEnvelope,
    HashAlg,
    KeyId,
    PublicKey,
    SymmetricKey,
    counting,
    hash as digest_of,
    keygen_symmetric,
    open_envelope,
    seal_envelope,
    sign_digest,
    sym_decrypt,
    sym_encrypt,
    verify_digest,
)
from ..crypto.symmetric import KEY_PAIRS
from ..errors import (
    AuthorizationDeclined,
    CertificateInvalid,
    CryptoError,
    DeliveryFailure,
    DoubleSettlement,
    EnvelopeOpenFailed,
    IntegrityFailure,
    MissingKey,
    NotSettled,
    PaymentMismatch,
    ProtocolError,
    ReplayRejected,
    ScmciError,
    SignatureInvalid,
    UnexpectedMessage,
    WireError,
)
from ..ids import Participant
from ..seeding import rng
from ..wire import MsgType, WireMessage, bytes_to_int, int_to_bytes, pack_fields, unpack_fields
from .ledger import BankLedger
from .messages import (
    AuthorizationInfo,
    AuthorizationResponse,
    ForwardedOrder,
    OrderSummary,
    PaymentResponse,
    PurchaseBundle,
    PurchaseDetails,
)
from .operations import (
    MerchantView,
    bank_authorize,
    compose_purchase,
    deliver_goods,
    gateway_process,
    merchant_process,
)
from .pki import Certificate, verify_certificate

P = Participant

ALLOWED_KEYS: dict[Participant, frozenset[KeyId]] = {
    P.C: frozenset({KeyId.SK1, KeyId.SK5}),
    P.M: frozenset({KeyId.SK1, KeyId.SK2}),
    P.PG: frozenset({KeyId.SK2, KeyId.SK3, KeyId.SK4, KeyId.SK5}),
    P.CB: frozenset({KeyId.SK3}),
    P.MB: frozenset({KeyId.SK4}),
}

# who seals which key for whom, in step order: (key, originator, recipient, seal step, transmit step)
KEY_DISTRIBUTION = (
    (KeyId.SK1, P.M, P.C, 3, 4),
    (KeyId.SK2, P.PG, P.M, 5, 6),
    (KeyId.SK5, P.PG, P.C, 7, 8),
    (KeyId.SK3, P.PG, P.CB, 9, 10),
    (KeyId.SK4, P.PG, P.MB, 11, 12),
)

# certificate frames of step 1: each envelope originator learns its recipients' keys
CERT_FLOW = ((P.C, P.M), (P.M, P.PG), (P.C, P.PG), (P.CB, P.PG), (P.MB, P.PG))

PHASE_OF = {
    MsgType.CERT_EXCHANGE: "setup",
    MsgType.ENVELOPE: "setup",
    MsgType.PURCHASE: "purchase",
    MsgType.ORDER_FWD: "purchase",
    MsgType.PD_FWD: "settlement",
    MsgType.AUTH_INFO: "settlement",
    MsgType.AUTH_RESP: "settlement",
    MsgType.PAY_RESP: "settlement",
    MsgType.GOODS: "settlement",
    MsgType.BASELINE_HYBRID: "baseline",
    MsgType.ABORT: "abort",
}
PHASES = ("registration", "setup", "purchase", "settlement", "baseline", "abort")

STEP_OF = {
    MsgType.CERT_EXCHANGE: 1,
    MsgType.ENVELOPE: 4,
    MsgType.PURCHASE: 17,
    MsgType.ORDER_FWD: 21,
    MsgType.PD_FWD: 23,
    MsgType.AUTH_INFO: 25,
    MsgType.AUTH_RESP: 25,
    MsgType.PAY_RESP: 29,
    MsgType.GOODS: 30,
}


class State(str, Enum):
    INIT = "INIT"
    KEYED = "KEYED"
    ORDERED = "ORDERED"
    ORDER_FORWARDED = "ORDER_FORWARDED"
    AWAITING_AUTH = "AWAITING_AUTH"
    AWAITING_CAPTURE = "AWAITING_CAPTURE"
    AWAITING_CREDIT = "AWAITING_CREDIT"
    AUTHORIZED = "AUTHORIZED"
    DECLINED = "DECLINED"
    SETTLED = "SETTLED"
    COMPLETE = "COMPLETE"
    ABORTED = "ABORTED"


@dataclass(frozen=True)
class Identity:
    keypair: AsymmetricKeyPair
    cert: Certificate


@dataclass(frozen=True)
class PartyConfig:
    hash_alg: HashAlg = HashAlg.MD5
    sym_bytes: int = 16
    setup_seed: int = 0
    purchase_seed: int = 0
    today: str = "1026"  # MMYY used for expiry checks
    merchant_account: str = "MERCHANT-0001"


@dataclass
class Recorder:
    """Shared session log: executed steps, failures and per-phase op counters."""

    steps: list[tuple[int, str, str]] = field(default_factory=list)
    failures: list[tuple[Participant, ProtocolError]] = field(default_factory=list)
    counters: dict[str, Counter] = field(default_factory=lambda: {p: Counter() for p in PHASES})

    def step_numbers(self) -> list[int]:
        return [s for s, _, _ in self.steps]


class LookupTable:
    """A party's pairwise session keys, keyed by participant pair."""

    def __init__(self, owner: Participant):
        self.owner = Participant(owner)
        self._keys: dict[tuple[Participant, Participant], SymmetricKey] = {}

    def install(self, key: SymmetricKey) -> None:
        if self.owner not in key.pair:
            raise EnvelopeOpenFailed(f"{self.owner.name} is not a member of {key.key_id.value}'s pair")
        if key.pair in self._keys:
            raise EnvelopeOpenFailed(f"{key.key_id.value} already installed")
        self._keys[key.pair] = key

    def key(self, key_id: KeyId) -> SymmetricKey:
        try:
            return self._keys[KEY_PAIRS[KeyId(key_id)]]
        except KeyError:
            raise MissingKey(f"{self.owner.name} holds no {KeyId(key_id).value}") from None

    def has(self, key_id: KeyId) -> bool:
        return KEY_PAIRS.get(KeyId(key_id)) in self._keys

    def key_ids(self) -> frozenset[KeyId]:
        return frozenset(k.key_id for k in self._keys.values())

    def as_dict(self) -> dict[tuple[Participant, Participant], SymmetricKey]:
        return dict(self._keys)

    def complete(self) -> bool:
        return self.key_ids() == ALLOWED_KEYS[self.owner]

    def __repr__(self) -> str:
        ids = ", ".join(sorted(k.value for k in self.key_ids()))
        return f"LookupTable({self.owner.name}: {ids})"


def encode_envelope(env: DigitalEnvelope, modulus_bytes: int) -> bytes:
    return pack_fields(
        bytes([int(env.recipient), env.key_id.code, env.key_length, int(env.pair[0]), int(env.pair[1])]),
        int_to_bytes(env.sealed_key, modulus_bytes),
    )


def decode_envelope(payload: bytes) -> DigitalEnvelope:
    meta, sealed = unpack_fields(payload, 2)
    if len(meta) != 5:
        raise WireError("bad envelope metadata")
    try:
        return DigitalEnvelope(
            Participant(meta[0]),
            bytes_to_int(sealed),
            KeyId.from_code(meta[1]),
            (Participant(meta[3]), Participant(meta[4])),
            meta[2],
        )
    except ValueError as exc:
        raise WireError(str(exc)) from exc


class Party:
    pid: Participant

    def __init__(self, identity: Identity, ca_pub: PublicKey, config: PartyConfig, recorder: Recorder):
        self.identity = identity
        self.ca_pub = PublicKey(*ca_pub)
        self.config = config
        self.recorder = recorder
        self.lookup = LookupTable(self.pid)
        self.certs: dict[Participant, Certificate] = {}
        self.state = State.INIT
        self.plaintexts_seen: list[bytes] = []
        self.remote_abort: bytes | None = None
        self._seq = 0
        self._last_seen: dict[Participant, int] = {}

    # plumbing

    def log(self, step: int, text: str) -> None:
        self.recorder.steps.append((step, self.pid.name, text))

    def reference(self, label: str, order_id: bytes) -> bytes:
        return rng(self.config.purchase_seed, self.pid.name, label, order_id.hex()).randbytes(8)

    def frame(self, msg_type: MsgType, receiver: Participant, payload: bytes) -> WireMessage:
        self._seq += 1
        return WireMessage(msg_type, self.pid, Participant(receiver), self._seq, payload)

    def send(self, bus, msg_type: MsgType, receiver: Participant, payload: bytes) -> None:
        bus.send(self.frame(msg_type, receiver, payload))

    def decrypt(self, key: SymmetricKey, ciphertext: bytes) -> bytes:
        plain = sym_decrypt(key, ciphertext)
        self.plaintexts_seen.append(plain)
        return plain

    def _handlers(self) -> dict:
        return {}

    def handle(self, msg: WireMessage, bus) -> None:
        with counting(self.recorder.counters[PHASE_OF[msg.msg_type]]):
            try:
                self._check_seq(msg)
                if msg.msg_type is MsgType.ABORT:
                    self.remote_abort = msg.payload
                    if self.state is not State.COMPLETE:
                        self.state = State.ABORTED
                    return
                if self.state is State.ABORTED:
                    return
                handler = self._handlers().get(msg.msg_type)
                if handler is None:
                    raise UnexpectedMessage(f"{self.pid.name} does not accept {msg.msg_type.name}")
                handler(msg, bus)
            except ProtocolError as exc:
                self._fail(exc, msg, bus)
            except ScmciError as exc:
                self._fail(IntegrityFailure(f"{type(exc).__name__}: {exc}", step=STEP_OF.get(msg.msg_type, 0)), msg, bus)

    def _check_seq(self, msg: WireMessage) -> None:
        last = self._last_seen.get(msg.sender)
        if last is not None and msg.seq <= last:
            raise ReplayRejected(
                f"stale seq {msg.seq} from {msg.sender.name} (last {last})", step=STEP_OF.get(msg.msg_type, 0)
            )
        self._last_seen[msg.sender] = msg.seq

    def _fail(self, exc: ProtocolError, msg: WireMessage, bus) -> None:
        self.recorder.failures.append((self.pid, exc))
        self.log(exc.step, f"{self.pid.name} rejects {msg.msg_type.name} from {msg.sender.name}: {exc.code}")
        if not isinstance(exc, ReplayRejected):
            self.state = State.ABORTED
        if msg.msg_type is not MsgType.ABORT and bus.is_registered(msg.sender) and msg.sender != self.pid:
            reason = pack_fields(bytes([exc.step & 0xFF]), exc.code.encode(), str(exc).encode()[:200])
            self.send(bus, MsgType.ABORT, msg.sender, reason)

    # setup

    def send_certificate(self, bus, to: Participant) -> None:
        self.log(1, f"{self.pid.name} sends DC_{self.pid.name} to {Participant(to).name}")
        self.send(bus, MsgType.CERT_EXCHANGE, to, self.identity.cert.to_bytes())

    def on_certificate(self, msg: WireMessage, bus) -> None:
        try:
            cert = Certificate.from_bytes(msg.payload)
        except WireError as exc:
            raise CertificateInvalid(str(exc)) from exc
        if cert.subject != msg.sender or not verify_certificate(self.ca_pub, cert, self.config.hash_alg):
            raise CertificateInvalid(f"certificate of {msg.sender.name} fails CA verification")
        self.certs[cert.subject] = cert
        self.log(1, f"{self.pid.name} verifies DC_{cert.subject.name}")

    def distribute_keys(self, bus) -> None:
        mine = [row for row in KEY_DISTRIBUTION if row[1] == self.pid]
        if not mine:
            return
        keys = {}
        for key_id, _, _, _, _ in mine:
            keys[key_id] = keygen_symmetric(self.config.setup_seed, key_id, length=self.config.sym_bytes)
        self.log(2, f"{self.pid.name} generates {', '.join(k.value for k in keys)}")
        for key_id, _, recipient, seal_step, send_step in mine:
            cert = self.certs.get(recipient)
            if cert is None:
                raise MissingKey(f"{self.pid.name} has no certificate for {recipient.name}", step=seal_step)
            env = seal_envelope(cert, keys[key_id])
            self.log(seal_step, f"{self.pid.name} generates DE({key_id.value}, PUBK_{recipient.name})")
            self.send(bus, MsgType.ENVELOPE, recipient, encode_envelope(env, cert.public_key.size))
            self.log(send_step, f"{self.pid.name} transmits DE({key_id.value}) to {recipient.name}")
            self.lookup.install(keys[key_id])
        self._maybe_keyed()

    def on_envelope(self, msg: WireMessage, bus) -> None:
        expected = {(row[1], row[2]): row for row in KEY_DISTRIBUTION}
        row = expected.get((msg.sender, self.pid))
        step = row[4] if row else 4
        try:
            env = decode_envelope(msg.payload)
            if row is None or env.key_id is not row[0] or env.recipient != self.pid:
                raise EnvelopeOpenFailed("unexpected envelope", step=step)
            if self.lookup.has(env.key_id):
                raise EnvelopeOpenFailed(f"{env.key_id.value} envelope already consumed", step=step)
            key = open_envelope(self.identity.keypair.private, env)
        except (WireError, CryptoError, ValueError) as exc:
            raise EnvelopeOpenFailed(f"{type(exc).__name__}: {exc}", step=step) from exc
        self.lookup.install(key)
        self.log(step, f"{self.pid.name} opens DE({key.key_id.value})")
        self._maybe_keyed()

    def _maybe_keyed(self) -> None:
        if self.lookup.complete() and self.state is State.INIT:
            self.state = State.KEYED

    def _require(self, *states: State) -> None:
        if self.state not in states:
            raise UnexpectedMessage(f"{self.pid.name} in state {self.state.value}")


class Customer(Party):
    pid = P.C

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.order: OrderSummary | None = None
        self.goods: bytes | None = None

    def _handlers(self):
        return {MsgType.ENVELOPE: self.on_envelope, MsgType.GOODS: self.on_goods}

    def begin_purchase(self, bus, os: OrderSummary, pd: PurchaseDetails) -> PurchaseBundle:
        self._require(State.KEYED)
        with counting(self.recorder.counters["purchase"]):
            bundle = compose_purchase(self, os, pd)
            self.send(bus, MsgType.PURCHASE, P.M, bundle.to_bytes())
        self.log(16, "C transmits Cipher_C to M")
        self.order = os
        self.state = State.ORDERED
        return bundle

    def on_goods(self, msg, bus) -> None:
        self._require(State.ORDERED)
        try:
            plain = self.decrypt(self.lookup.key(KeyId.SK1), msg.payload)
        except CryptoError as exc:
            raise DeliveryFailure(str(exc)) from exc
        if plain[:8] != self.order.order_id or plain[8:14] != b"GOODS:":
            raise DeliveryFailure("goods do not match the order")
        self.goods = plain[14:]
        self.state = State.COMPLETE
        self.log(30, "C receives goods for the order")


class Merchant(Party):
    pid = P.M

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.order: MerchantView | None = None
        self.authorization: AuthorizationResponse | None = None
        self.settled_payment: PaymentResponse | None = None

    def _handlers(self):
        return {
            MsgType.CERT_EXCHANGE: self.on_certificate,
            MsgType.ENVELOPE: self.on_envelope,
            MsgType.PURCHASE: self.on_purchase,
            MsgType.AUTH_RESP: self.on_auth_resp,
            MsgType.PAY_RESP: self.on_pay_resp,
        }

    def accept_order(self, view: MerchantView) -> None:
        self.order = view

    def on_purchase(self, msg, bus) -> None:
        self._require(State.KEYED)
        try:
            bundle = PurchaseBundle.from_bytes(msg.payload, self.config.hash_alg)
        except WireError as exc:
            raise IntegrityFailure(f"bundle framing: {exc}") from exc
        fwd = merchant_process(self, bundle)
        self.send(bus, MsgType.ORDER_FWD, P.PG, fwd.to_bytes())
        self.log(21, "M transmits enc(SK2, H(OD)) and the PD part to PG")
        self.state = State.ORDER_FORWARDED

    def verify_authorization(self, ar: AuthorizationResponse, pg_cert: Certificate) -> None:
        if pg_cert.subject != P.PG or not verify_certificate(self.ca_pub, pg_cert, self.config.hash_alg):
            raise SignatureInvalid("gateway certificate fails CA verification")
        if not verify_digest(pg_cert.public_key, digest_of(self.config.hash_alg, ar.ai.to_bytes()), ar.signature):
            raise SignatureInvalid("authorization response signature does not verify")
        if self.order is None or ar.ai.order_id != self.order.os.order_id:
            raise PaymentMismatch("authorization is for a different order", step=25)
        if not ar.ai.approved:
            self.state = State.DECLINED
            raise AuthorizationDeclined(f"declined: {ar.ai.reason.name}")
        self.authorization = ar
        self.log(25, "M verifies PG's signature on AR")

    def on_auth_resp(self, msg, bus) -> None:
        self._require(State.ORDER_FORWARDED)
        plain = self.decrypt(self.lookup.key(KeyId.SK2), msg.payload)
        ar_bytes, cert_bytes = unpack_fields(plain, 2)
        self.verify_authorization(AuthorizationResponse.from_bytes(ar_bytes), Certificate.from_bytes(cert_bytes))
        self.state = State.AUTHORIZED

    def verify_payment(self, pr: PaymentResponse) -> None:
        if self.authorization is None:
            raise NotSettled("no verified authorization for this order")
        os = self.order.os
        if pr.order_id != os.order_id or pr.amount != os.total_amount:
            raise PaymentMismatch("payment response does not match the order")
        if pr.credit_ref == bytes(8) or pr.debit_ref == bytes(8):
            raise PaymentMismatch("payment response lacks debit or credit reference")
        self.settled_payment = pr
        self.log(29, "M verifies PR")

    def goods_frame(self) -> WireMessage:
        if self.settled_payment is None:
            raise NotSettled("no verified payment response")
        os = self.order.os
        payload = sym_encrypt(self.lookup.key(KeyId.SK1), os.order_id + b"GOODS:" + os.item_list)
        self.log(30, "M transmits goods to C")
        return self.frame(MsgType.GOODS, P.C, payload)

    def on_pay_resp(self, msg, bus) -> None:
        self._require(State.AUTHORIZED)
        pr = PaymentResponse.from_bytes(self.decrypt(self.lookup.key(KeyId.SK2), msg.payload))
        bus.send(deliver_goods(self, pr))
        self.state = State.COMPLETE


class Gateway(Party):
    pid = P.PG

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.pending: PurchaseDetails | None = None
        self.authorization: AuthorizationResponse | None = None

    def _handlers(self):
        return {
            MsgType.CERT_EXCHANGE: self.on_certificate,
            MsgType.ORDER_FWD: self.on_order_fwd,
            MsgType.AUTH_INFO: self.on_auth_info,
            MsgType.PAY_RESP: self.on_pay_resp,
        }

    def on_order_fwd(self, msg, bus) -> None:
        self._require(State.KEYED)
        try:
            fwd = ForwardedOrder.from_bytes(msg.payload, self.config.hash_alg)
        except WireError as exc:
            raise IntegrityFailure(f"forwarded order framing: {exc}", step=21) from exc
        req = gateway_process(self, fwd)
        self.pending = req.pd
        self.send(bus, MsgType.PD_FWD, P.CB, sym_encrypt(self.lookup.key(KeyId.SK3), req.pd.to_bytes()))
        self.log(22, "PG transmits PD to CB under SK3")
        self.state = State.AWAITING_AUTH

    def sign_authorization(self, ai: AuthorizationInfo) -> AuthorizationResponse:
        digest = digest_of(self.config.hash_alg, ai.to_bytes())
        ar = AuthorizationResponse(ai, sign_digest(self.identity.keypair.private, digest))
        self.log(25, "PG signs AR")
        return ar

    def on_auth_info(self, msg, bus) -> None:
        self._require(State.AWAITING_AUTH)
        ai = AuthorizationInfo.from_bytes(self.decrypt(self.lookup.key(KeyId.SK3), msg.payload))
        if ai.order_id != self.pending.order_id:
            raise PaymentMismatch("AI for an unknown order", step=24)
        ar = self.authorization = self.sign_authorization(ai)
        to_m = pack_fields(ar.to_bytes(), self.identity.cert.to_bytes())
        self.send(bus, MsgType.AUTH_RESP, P.M, sym_encrypt(self.lookup.key(KeyId.SK2), to_m))
        self.log(25, "PG transmits AR to M")
        if ai.approved:
            self.send(bus, MsgType.AUTH_RESP, P.CB, sym_encrypt(self.lookup.key(KeyId.SK3), ar.to_bytes()))
            self.state = State.AWAITING_CAPTURE
        else:
            self.state = State.DECLINED

    def on_pay_resp(self, msg, bus) -> None:
        if msg.sender == P.CB:
            self._require(State.AWAITING_CAPTURE)
            pr = PaymentResponse.from_bytes(self.decrypt(self.lookup.key(KeyId.SK3), msg.payload))
            self.send(bus, MsgType.PAY_RESP, P.MB, sym_encrypt(self.lookup.key(KeyId.SK4), pr.to_bytes()))
            self.log(27, "PG redirects PR to MB")
            self.state = State.AWAITING_CREDIT
        elif msg.sender == P.MB:
            self._require(State.AWAITING_CREDIT)
            pr = PaymentResponse.from_bytes(self.decrypt(self.lookup.key(KeyId.SK4), msg.payload))
            self.send(bus, MsgType.PAY_RESP, P.M, sym_encrypt(self.lookup.key(KeyId.SK2), pr.to_bytes()))
            self.log(29, "PG transmits PR to M")
            self.state = State.COMPLETE
        else:
            raise UnexpectedMessage(f"PAY_RESP from {msg.sender.name}")


class CustomerBank(Party):
    pid = P.CB

    def __init__(self, *args, balances: dict[str, int] | None = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.ledger = BankLedger(dict(balances or {}))
        self.pending: dict[bytes, PurchaseDetails] = {}

    def _handlers(self):
        return {
            MsgType.ENVELOPE: self.on_envelope,
            MsgType.PD_FWD: self.on_pd_fwd,
            MsgType.AUTH_RESP: self.on_auth_resp,
        }

    def authorize(self, pd: PurchaseDetails) -> AuthorizationInfo:
        ai = bank_authorize(self, pd)
        if ai.approved:
            self.pending[pd.order_id] = pd
        return ai

    def on_pd_fwd(self, msg, bus) -> None:
        self._require(State.KEYED)
        pd = PurchaseDetails.from_bytes(self.decrypt(self.lookup.key(KeyId.SK3), msg.payload))
        ai = self.authorize(pd)
        self.send(bus, MsgType.AUTH_INFO, P.PG, sym_encrypt(self.lookup.key(KeyId.SK3), ai.to_bytes()))
        self.log(24, "CB transmits AI to PG")
        self.state = State.AUTHORIZED if ai.approved else State.DECLINED

    def capture(self, ar: AuthorizationResponse) -> PaymentResponse:
        oid = ar.ai.order_id
        if self.ledger.has(oid):
            raise DoubleSettlement(f"order {oid!r} already debited", step=26)
        if not ar.ai.approved:
            raise AuthorizationDeclined("capture of a declined authorization", step=26)
        pd = self.pending.get(oid)
        if pd is None:
            raise NotSettled(f"no authorized purchase {oid!r}", step=26)
        self.ledger.apply(pd.card_number, oid, -pd.amount, step=26)
        self.log(26, f"CB debits {pd.amount} for C and issues PR")
        return PaymentResponse(oid, pd.amount, self.reference("debit", oid))

    def on_auth_resp(self, msg, bus) -> None:
        self._require(State.AUTHORIZED)
        ar = AuthorizationResponse.from_bytes(self.decrypt(self.lookup.key(KeyId.SK3), msg.payload))
        pr = self.capture(ar)
        self.send(bus, MsgType.PAY_RESP, P.PG, sym_encrypt(self.lookup.key(KeyId.SK3), pr.to_bytes()))
        self.log(26, "CB transmits PR to PG")
        self.state = State.SETTLED


class MerchantBank(Party):
    pid = P.MB

    def __init__(self, *args, balances: dict[str, int] | None = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.ledger = BankLedger(dict(balances or {}))

    def _handlers(self):
        return {MsgType.ENVELOPE: self.on_envelope, MsgType.PAY_RESP: self.on_pay_resp}

    def credit(self, pr: PaymentResponse) -> PaymentResponse:
        self.ledger.apply(self.config.merchant_account, pr.order_id, pr.amount, step=28)
        self.log(28, f"MB credits {pr.amount} to M")
        return PaymentResponse(pr.order_id, pr.amount, pr.debit_ref, self.reference("credit", pr.order_id))

    def on_pay_resp(self, msg, bus) -> None:
        self._require(State.KEYED)
        pr = PaymentResponse.from_bytes(self.decrypt(self.lookup.key(KeyId.SK4), msg.payload))
        out = self.credit(pr)
        self.send(bus, MsgType.PAY_RESP, P.PG, sym_encrypt(self.lookup.key(KeyId.SK4), out.to_bytes()))
        self.state = State.SETTLED


PARTY_CLASSES = {P.C: Customer, P.M: Merchant, P.PG: Gateway, P.CB: CustomerBank, P.MB: MerchantBank}
