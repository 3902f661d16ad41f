"""Exception hierarchy for the whole package."""

from __future__ import annotations


class ScmciError(Exception):
    """Base class for every error raised by this package."""


# crypto_core


class CryptoError(ScmciError):
    pass


class MalformedCiphertext(CryptoError):
    """Bad length or invalid pad header. Its observability is the attack oracle."""


class InputTooLarge(CryptoError):
    pass


class KeyTooLargeForModulus(CryptoError):
    pass


class WrongRecipient(CryptoError):
    pass


class PaddingError(CryptoError):
    """OAEP decoding failed."""


# wire


class WireError(ScmciError):
    pass


class Truncated(WireError):
    pass


class BadVersion(WireError):
    pass


class UnknownType(WireError):
    pass


# netsim


class UnknownReceiver(ScmciError):
    pass


# protocol


class ProtocolError(ScmciError):
    """A verification failure inside the protocol. ``step`` is the step that rejected."""

    code = "PROTOCOL_ERROR"
    default_step = 0

    def __init__(self, message: str = "", step: int | None = None):
        super().__init__(message or self.code)
        self.step = self.default_step if step is None else step


class CertificateInvalid(ProtocolError):
    code = "CERTIFICATE_INVALID"
    default_step = 1


class EnvelopeOpenFailed(ProtocolError):
    code = "ENVELOPE_OPEN_FAILED"
    default_step = 4


class MissingKey(ProtocolError):
    code = "MISSING_KEY"
    default_step = 14


class OrderMismatch(ProtocolError):
    code = "ORDER_MISMATCH"
    default_step = 14


class IntegrityFailure(ProtocolError):
    code = "INTEGRITY_FAILURE"
    default_step = 17


class LinkageFailure(ProtocolError):
    code = "LINKAGE_FAILURE"
    default_step = 21


class ConsistencyFailure(ProtocolError):
    code = "CONSISTENCY_FAILURE"
    default_step = 21


class ReplayRejected(ProtocolError):
    code = "REPLAY_REJECTED"


class AuthorizationDeclined(ProtocolError):
    code = "AUTHORIZATION_DECLINED"
    default_step = 25


class SignatureInvalid(ProtocolError):
    code = "SIGNATURE_INVALID"
    default_step = 25


class DoubleSettlement(ProtocolError):
    code = "DOUBLE_SETTLEMENT"
    default_step = 26


class PaymentMismatch(ProtocolError):
    code = "PAYMENT_MISMATCH"
    default_step = 29


class NotSettled(ProtocolError):
    code = "NOT_SETTLED"
    default_step = 30


class DeliveryFailure(ProtocolError):
    code = "DELIVERY_FAILURE"
    default_step = 30


class UnexpectedMessage(ProtocolError):
    code = "UNEXPECTED_MESSAGE"


class FlowStalled(ProtocolError):
    """The run went idle before reaching its terminal state (e.g. a frame was dropped)."""

    code = "FLOW_STALLED"


class ConfigError(ScmciError):
    """Invalid scenario configuration. ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
