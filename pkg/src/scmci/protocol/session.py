"""Deployments (long-term registration) and sessions (one protocol run)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..crypto import HashAlg, counting, keygen_rsa
from ..crypto.ops import as_dict, public_key_ops
from ..errors import FlowStalled, ProtocolError, ReplayRejected
from ..ids import Participant
from ..netsim import Bus, InterceptHook
from ..seeding import derive_seed
from ..wire import MsgType, Transcript, WireMessage
from .messages import OrderSummary, PaymentResponse, PurchaseDetails
from .participants import (
    CERT_FLOW,
    PARTY_CLASSES,
    Customer,
    CustomerBank,
    Gateway,
    Identity,
    LookupTable,
    Merchant,
    MerchantBank,
    Party,
    PartyConfig,
    Recorder,
    State,
)
from .pki import CertificateAuthority

P = Participant
PARTIES = (P.C, P.M, P.PG, P.CB, P.MB)


@dataclass(frozen=True)
class ProtocolConfig:
    rsa_bits: int = 512
    sym_bytes: int = 16
    hash_alg: HashAlg = HashAlg.MD5
    today: str = "1026"
    merchant_account: str = "MERCHANT-0001"


class Deployment:
    """CA plus every party's long-term key pair and certificate.

    Session keys come from ``setup_seed``; :meth:`rotate` replaces it, which
    is what an aborted handshake does.
    """

    def __init__(self, seed: int, config: ProtocolConfig | None = None):
        self.seed = seed
        self.config = config or ProtocolConfig()
        reg = derive_seed(seed, "registration")
        self.registration_ops = Counter()
        with counting(self.registration_ops):
            self.ca = CertificateAuthority.from_seed(derive_seed(reg, "CA"), self.config.rsa_bits, self.config.hash_alg)
            self.identities: dict[Participant, Identity] = {}
            for pid in PARTIES:
                kp = keygen_rsa(derive_seed(reg, pid.name), self.config.rsa_bits)
                self.identities[pid] = Identity(kp, self.ca.issue(pid, kp.public))
        self.setup_seed = derive_seed(seed, "setup")
        self.purchase_seed = derive_seed(seed, "purchase")
        self.generation = 0

    def rotate(self) -> None:
        self.generation += 1
        self.setup_seed = derive_seed(self.setup_seed, "rotate", self.generation)

    def session(self, hook: InterceptHook | None = None, cb_balances=None, mb_balances=None) -> "Session":
        return Session(self, hook=hook, cb_balances=cb_balances, mb_balances=mb_balances)


@dataclass
class PurchaseOutcome:
    state: dict[Participant, State]
    payment: PaymentResponse | None
    cb_delta: int
    mb_delta: int
    goods: bytes | None = None

    @property
    def complete(self) -> bool:
        return self.goods is not None


class Session:
    def __init__(self, deployment: Deployment, hook: InterceptHook | None = None, cb_balances=None, mb_balances=None):
        from ..fixtures import DEFAULT_CB_BALANCES, DEFAULT_MB_BALANCES

        self.deployment = deployment
        cfg = deployment.config
        self.party_config = PartyConfig(
            hash_alg=cfg.hash_alg,
            sym_bytes=cfg.sym_bytes,
            setup_seed=deployment.setup_seed,
            purchase_seed=deployment.purchase_seed,
            today=cfg.today,
            merchant_account=cfg.merchant_account,
        )
        self.bus = Bus(hook)
        self.recorder = Recorder()
        self.trudy_inbox: list[WireMessage] = []
        ca_pub = deployment.ca.public
        args = (ca_pub, self.party_config, self.recorder)
        ids = deployment.identities
        self.parties: dict[Participant, Party] = {
            P.C: Customer(ids[P.C], *args),
            P.M: Merchant(ids[P.M], *args),
            P.PG: Gateway(ids[P.PG], *args),
            P.CB: CustomerBank(ids[P.CB], *args, balances=cb_balances or DEFAULT_CB_BALANCES),
            P.MB: MerchantBank(ids[P.MB], *args, balances=mb_balances or DEFAULT_MB_BALANCES),
        }
        assert set(self.parties) == set(PARTY_CLASSES)
        for pid, party in self.parties.items():
            self.bus.register(pid, party)
        self.bus.register(P.TRUDY, lambda msg, bus: self.trudy_inbox.append(msg))
        self.setup_frames: int | None = None

    @property
    def transcript(self) -> Transcript:
        return self.bus.transcript

    @property
    def counters(self) -> dict[str, Counter]:
        return self.recorder.counters

    def party(self, pid: Participant) -> Party:
        return self.parties[Participant(pid)]

    def _raise_new_failures(self, since: int) -> None:
        for _, exc in self.recorder.failures[since:]:
            raise exc

    def run_setup(self) -> dict[Participant, LookupTable]:
        """Steps 1-13. Raises the first verification failure."""
        mark = len(self.recorder.failures)
        with counting(self.counters["setup"]):
            for sender, receiver in CERT_FLOW:
                self.parties[sender].send_certificate(self.bus, receiver)
            self.bus.run_until_idle()
            self._raise_new_failures(mark)
            for pid in (P.M, P.PG):
                self.parties[pid].distribute_keys(self.bus)
            self.bus.run_until_idle()
            self._raise_new_failures(mark)
        for pid in PARTIES:
            if not self.parties[pid].lookup.complete():
                raise FlowStalled(f"{pid.name} lookup table incomplete", step=13)
        self.recorder.steps.append((13, "ALL", "lookup tables built for C, M, PG, CB, MB"))
        self.setup_frames = len(self.transcript)
        return {pid: self.parties[pid].lookup for pid in PARTIES}

    def run_purchase(self, os: OrderSummary, pd: PurchaseDetails) -> PurchaseOutcome:
        """Steps 14-30 for one order. Raises the first verification failure."""
        mark = len(self.recorder.failures)
        customer: Customer = self.parties[P.C]
        customer.begin_purchase(self.bus, os, pd)
        self.bus.run_until_idle()
        self._raise_new_failures(mark)
        cb: CustomerBank = self.parties[P.CB]
        mb: MerchantBank = self.parties[P.MB]
        outcome = PurchaseOutcome(
            state={pid: p.state for pid, p in self.parties.items()},
            payment=self.parties[P.M].settled_payment,
            cb_delta=cb.ledger.delta_for(os.order_id),
            mb_delta=mb.ledger.delta_for(os.order_id),
            goods=customer.goods,
        )
        if customer.state is not State.COMPLETE:
            last = max(self.recorder.step_numbers(), default=13)
            raise FlowStalled(f"run went idle with C in state {customer.state.value}", step=min(last + 1, 30))
        return outcome

    def run(self, os: OrderSummary, pd: PurchaseDetails) -> PurchaseOutcome:
        self.run_setup()
        return self.run_purchase(os, pd)

    def op_counts(self) -> dict[str, dict[str, int]]:
        out = {"registration": as_dict(self.deployment.registration_ops)}
        for phase in ("setup", "purchase", "settlement"):
            out[phase] = as_dict(self.counters[phase])
        return out

    def public_key_ops(self, phase: str) -> int:
        return public_key_ops(self.counters[phase])


@dataclass
class ReplayOutcome:
    accepted: bool
    error: ProtocolError | None = None
    frame: WireMessage | None = None

    @property
    def rejected_by_seq(self) -> bool:
        return isinstance(self.error, ReplayRejected)


def replay_frame(session: Session, frame: WireMessage) -> ReplayOutcome:
    """Re-inject ``frame`` into ``session`` and report how the receiver reacted."""
    mark = len(session.recorder.failures)
    session.bus.inject(frame)
    session.bus.run_until_idle()
    new = session.recorder.failures[mark:]
    if new:
        return ReplayOutcome(False, new[0][1], frame)
    return ReplayOutcome(True, None, frame)


def envelope_frames(transcript: Transcript) -> list[int]:
    return [i for i, e in enumerate(transcript) if e.message.msg_type is MsgType.ENVELOPE]
