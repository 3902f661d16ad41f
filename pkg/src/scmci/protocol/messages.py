"""Protocol data records and their byte encodings.

Every ``from_bytes`` is strict: any length or field mismatch raises
:class:`~scmci.errors.WireError`, which the receiving party turns into the
appropriate verification failure.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

from ..crypto import Digest, HashAlg
from ..errors import WireError
from ..wire import bytes_to_int, int_to_bytes, pack_fields, unpack_fields

ORDER_ID_LEN = 8
_U16 = struct.Struct(">H")
_U64 = struct.Struct(">Q")


def luhn_valid(number: str) -> bool:
    if not number.isdigit():
        return False
    total = 0
    for i, ch in enumerate(reversed(number)):
        d = int(ch)
        if i % 2:
            d *= 2
            if d > 9:
                d -= 9
        total += d
    return total % 10 == 0


def _check_order_id(order_id: bytes) -> None:
    if len(order_id) != ORDER_ID_LEN:
        raise ValueError(f"order_id must be {ORDER_ID_LEN} bytes")


@dataclass(frozen=True)
class OrderSummary:
    order_id: bytes
    item_list: bytes
    total_amount: int
    currency: str = "USD"

    def __post_init__(self):
        _check_order_id(self.order_id)
        if self.total_amount < 0:
            raise ValueError("total_amount must be >= 0")
        if len(self.currency) != 3 or not self.currency.isascii():
            raise ValueError("currency must be a 3-character code")

    def to_bytes(self) -> bytes:
        return (
            self.order_id
            + _U16.pack(len(self.item_list))
            + self.item_list
            + _U64.pack(self.total_amount)
            + self.currency.encode("ascii")
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "OrderSummary":
        if len(data) < ORDER_ID_LEN + 2 + 8 + 3:
            raise WireError("order summary too short")
        (n,) = _U16.unpack_from(data, ORDER_ID_LEN)
        if len(data) != ORDER_ID_LEN + 2 + n + 8 + 3:
            raise WireError("order summary length mismatch")
        items = data[ORDER_ID_LEN + 2 : ORDER_ID_LEN + 2 + n]
        (total,) = _U64.unpack_from(data, ORDER_ID_LEN + 2 + n)
        try:
            currency = data[-3:].decode("ascii")
            return cls(data[:ORDER_ID_LEN], items, total, currency)
        except (UnicodeDecodeError, ValueError) as exc:
            raise WireError(str(exc)) from exc


@dataclass(frozen=True)
class PurchaseDetails:
    order_id: bytes
    card_number: str
    expiry: str  # MMYY
    amount: int

    SIZE = ORDER_ID_LEN + 16 + 4 + 8

    def __post_init__(self):
        _check_order_id(self.order_id)
        if len(self.card_number) != 16 or not self.card_number.isdigit():
            raise ValueError("card_number must be 16 digits")
        if len(self.expiry) != 4 or not self.expiry.isdigit():
            raise ValueError("expiry must be 4 digits MMYY")
        if self.amount < 0:
            raise ValueError("amount must be >= 0")

    def to_bytes(self) -> bytes:
        return self.order_id + self.card_number.encode() + self.expiry.encode() + _U64.pack(self.amount)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PurchaseDetails":
        if len(data) != cls.SIZE:
            raise WireError("purchase details length mismatch")
        try:
            card = data[8:24].decode("ascii")
            expiry = data[24:28].decode("ascii")
            return cls(data[:8], card, expiry, _U64.unpack_from(data, 28)[0])
        except (UnicodeDecodeError, ValueError) as exc:
            raise WireError(str(exc)) from exc


def _digest_from(alg: HashAlg, raw: bytes) -> Digest:
    if len(raw) != alg.size:
        raise WireError(f"expected a {alg.size}-byte {alg.value} digest")
    return Digest(alg, raw)


@dataclass(frozen=True)
class PurchaseBundle:
    """The customer's Cipher_C.

    ``merchant_part`` = enc(SK1, OS || H(PD) || dual digest);
    ``gateway_part`` = enc(SK5, PD || dual digest).
    """

    merchant_part: bytes
    gateway_part: bytes
    h_os_clear: Digest

    def to_bytes(self) -> bytes:
        return pack_fields(self.merchant_part, self.gateway_part, self.h_os_clear.bytes)

    @classmethod
    def from_bytes(cls, data: bytes, alg: HashAlg) -> "PurchaseBundle":
        mp, gp, hos = unpack_fields(data, 3)
        return cls(mp, gp, _digest_from(alg, hos))


@dataclass(frozen=True)
class ForwardedOrder:
    """Merchant to gateway: enc(SK2, H(OD)), the untouched gateway part and H(OS)."""

    enc_h_od: bytes
    gateway_part: bytes
    h_os_clear: Digest

    def to_bytes(self) -> bytes:
        return pack_fields(self.enc_h_od, self.gateway_part, self.h_os_clear.bytes)

    @classmethod
    def from_bytes(cls, data: bytes, alg: HashAlg) -> "ForwardedOrder":
        e, gp, hos = unpack_fields(data, 3)
        return cls(e, gp, _digest_from(alg, hos))


@dataclass(frozen=True)
class AuthorizationRequest:
    pd: PurchaseDetails


class Reason(IntEnum):
    APPROVED = 0
    INSUFFICIENT_FUNDS = 1
    BAD_PAN = 2
    EXPIRED = 3
    UNKNOWN_ACCOUNT = 4


@dataclass(frozen=True)
class AuthorizationInfo:
    order_id: bytes
    approved: bool
    auth_code: bytes
    reason: Reason = Reason.APPROVED

    SIZE = ORDER_ID_LEN + 1 + 8 + 1

    def to_bytes(self) -> bytes:
        return self.order_id + bytes([int(self.approved)]) + self.auth_code + bytes([int(self.reason)])

    @classmethod
    def from_bytes(cls, data: bytes) -> "AuthorizationInfo":
        if len(data) != cls.SIZE or data[8] > 1:
            raise WireError("authorization info malformed")
        try:
            reason = Reason(data[17])
        except ValueError as exc:
            raise WireError(str(exc)) from exc
        return cls(data[:8], bool(data[8]), data[9:17], reason)


@dataclass(frozen=True)
class AuthorizationResponse:
    ai: AuthorizationInfo
    signature: int

    def to_bytes(self) -> bytes:
        return pack_fields(self.ai.to_bytes(), int_to_bytes(self.signature))

    @classmethod
    def from_bytes(cls, data: bytes) -> "AuthorizationResponse":
        ai, sig = unpack_fields(data, 2)
        return cls(AuthorizationInfo.from_bytes(ai), bytes_to_int(sig))


@dataclass(frozen=True)
class PaymentResponse:
    order_id: bytes
    amount: int
    debit_ref: bytes
    credit_ref: bytes = bytes(8)

    SIZE = ORDER_ID_LEN + 8 + 8 + 8

    def to_bytes(self) -> bytes:
        return self.order_id + _U64.pack(self.amount) + self.debit_ref + self.credit_ref

    @classmethod
    def from_bytes(cls, data: bytes) -> "PaymentResponse":
        if len(data) != cls.SIZE:
            raise WireError("payment response length mismatch")
        return cls(data[:8], _U64.unpack_from(data, 8)[0], data[16:24], data[24:32])
