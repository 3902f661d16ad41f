"""SCMCI: five parties, certificate exchange, envelopes, dual-digest purchase, settlement."""

from .ledger import BankLedger
from .messages import (
    AuthorizationInfo,
    AuthorizationRequest,
    AuthorizationResponse,
    ForwardedOrder,
    OrderSummary,
    PaymentResponse,
    PurchaseBundle,
    PurchaseDetails,
    Reason,
    luhn_valid,
)
from .operations import (
    SettlementResult,
    bank_authorize,
    compose_purchase,
    deliver_goods,
    gateway_process,
    merchant_process,
    settle,
)
from .participants import ALLOWED_KEYS, KEY_DISTRIBUTION, LookupTable, State
from .pki import Certificate, CertificateAuthority, verify_certificate
from .session import (
    Deployment,
    ProtocolConfig,
    PurchaseOutcome,
    ReplayOutcome,
    Session,
    envelope_frames,
    replay_frame,
)


def run_setup_phase(session: Session) -> dict:
    """Steps 1-13 on ``session``; returns each party's lookup table."""
    return session.run_setup()


__all__ = [
    "ALLOWED_KEYS",
    "AuthorizationInfo",
    "AuthorizationRequest",
    "AuthorizationResponse",
    "BankLedger",
    "Certificate",
    "CertificateAuthority",
    "Deployment",
    "ForwardedOrder",
    "KEY_DISTRIBUTION",
    "LookupTable",
    "OrderSummary",
    "PaymentResponse",
    "ProtocolConfig",
    "PurchaseBundle",
    "PurchaseDetails",
    "PurchaseOutcome",
    "Reason",
    "ReplayOutcome",
    "Session",
    "SettlementResult",
    "State",
    "bank_authorize",
    "compose_purchase",
    "deliver_goods",
    "envelope_frames",
    "gateway_process",
    "luhn_valid",
    "merchant_process",
    "replay_frame",
    "run_setup_phase",
    "settle",
    "verify_certificate",
]
