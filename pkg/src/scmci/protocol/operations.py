"""The purchase, verification and settlement steps as plain functions.

Each function takes the acting party's state object and either returns the
next message record or raises the matching :class:`ProtocolError`. The bus
handlers in :mod:`.participants` call these; tests call them directly.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..crypto import Digest, KeyId, hash as digest_of, link_digests, sym_encrypt
from ..errors import (
    AuthorizationDeclined,
    ConsistencyFailure,
    CryptoError,
    IntegrityFailure,
    LinkageFailure,
    NotSettled,
    OrderMismatch,
    WireError,
)
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


def compose_purchase(customer, os: OrderSummary, pd: PurchaseDetails) -> PurchaseBundle:
    if os.order_id != pd.order_id:
        raise OrderMismatch(f"OS order {os.order_id!r} != PD order {pd.order_id!r}")
    sk1 = customer.lookup.key(KeyId.SK1)
    sk5 = customer.lookup.key(KeyId.SK5)
    alg = customer.config.hash_alg
    os_bytes, pd_bytes = os.to_bytes(), pd.to_bytes()
    h_os, h_pd = digest_of(alg, os_bytes), digest_of(alg, pd_bytes)
    dd = link_digests(alg, h_os, h_pd)
    customer.log(14, "C computes H(OS) and H(PD)")
    bundle = PurchaseBundle(
        merchant_part=sym_encrypt(sk1, os_bytes + h_pd.bytes + dd.bytes),
        gateway_part=sym_encrypt(sk5, pd_bytes + dd.bytes),
        h_os_clear=h_os,
    )
    customer.log(15, "C builds Cipher_C: OS part under SK1, PD part under SK5, both carrying H(H(OS)||H(PD))")
    return bundle


@dataclass(frozen=True)
class MerchantView:
    os: OrderSummary
    h_pd: bytes
    dual_digest: bytes


def merchant_process(merchant, bundle: PurchaseBundle) -> ForwardedOrder:
    sk1 = merchant.lookup.key(KeyId.SK1)
    sk2 = merchant.lookup.key(KeyId.SK2)
    alg = merchant.config.hash_alg
    size = alg.size
    try:
        plain = merchant.decrypt(sk1, bundle.merchant_part)
        if len(plain) < 2 * size:
            raise WireError("merchant part too short")
        os_bytes, h_pd, dd = plain[: -2 * size], plain[-2 * size : -size], plain[-size:]
        os = OrderSummary.from_bytes(os_bytes)
    except (CryptoError, WireError) as exc:
        raise IntegrityFailure(f"merchant part unreadable: {exc}", step=18) from exc
    merchant.log(18, "M decrypts OS under SK1")
    merchant.log(19, "M recovers H(H(OS)||H(PD)) under SK1")
    h_os = digest_of(alg, os_bytes)
    recomputed = link_digests(alg, h_os, Digest(alg, h_pd))
    if recomputed.bytes != dd:
        raise IntegrityFailure("dual digest mismatch", step=17)
    if h_os != bundle.h_os_clear:
        raise IntegrityFailure("carried H(OS) does not match the order", step=17)
    merchant.log(17, "M recomputes the dual digest; Cipher_C verified")
    merchant.accept_order(MerchantView(os, h_pd, dd))
    # OD is the merchant's order record: the OS bytes as received
    h_od = digest_of(alg, os_bytes)
    fwd = ForwardedOrder(sym_encrypt(sk2, h_od.bytes), bundle.gateway_part, bundle.h_os_clear)
    merchant.log(20, "M computes H(OS) and enc(SK2, H(OD))")
    return fwd


def gateway_process(pg, fwd: ForwardedOrder) -> AuthorizationRequest:
    sk2 = pg.lookup.key(KeyId.SK2)
    pg.lookup.key(KeyId.SK3)
    sk5 = pg.lookup.key(KeyId.SK5)
    alg = pg.config.hash_alg
    try:
        plain = pg.decrypt(sk5, fwd.gateway_part)
        pd = PurchaseDetails.from_bytes(plain[: -alg.size])
        dd = plain[-alg.size :]
    except (CryptoError, WireError) as exc:
        raise LinkageFailure(f"gateway part unreadable: {exc}") from exc
    if link_digests(alg, fwd.h_os_clear, digest_of(alg, pd.to_bytes())).bytes != dd:
        raise LinkageFailure("dual digest does not link H(OS) to this PD")
    try:
        h_od = pg.decrypt(sk2, fwd.enc_h_od)
    except CryptoError as exc:
        raise ConsistencyFailure(f"H(OD) unreadable: {exc}") from exc
    if h_od != fwd.h_os_clear.bytes:
        raise ConsistencyFailure("merchant's H(OD) disagrees with the customer's H(OS)")
    pg.log(21, "PG verifies the dual digest and that OD was not altered")
    return AuthorizationRequest(pd)


def _expiry_ok(expiry: str, today: str) -> bool:
    month, year = int(expiry[:2]), int(expiry[2:])
    if not 1 <= month <= 12:
        return False
    t_month, t_year = int(today[:2]), int(today[2:])
    return (year, month) >= (t_year, t_month)


def bank_authorize(cb, pd: PurchaseDetails) -> AuthorizationInfo:
    auth_code = cb.reference("auth", pd.order_id)
    if not luhn_valid(pd.card_number):
        reason = Reason.BAD_PAN
    elif pd.card_number not in cb.ledger.balances:
        reason = Reason.UNKNOWN_ACCOUNT
    elif not _expiry_ok(pd.expiry, cb.config.today):
        reason = Reason.EXPIRED
    elif cb.ledger.balances[pd.card_number] < pd.amount:
        reason = Reason.INSUFFICIENT_FUNDS
    else:
        reason = Reason.APPROVED
    approved = reason is Reason.APPROVED
    cb.log(23, f"CB verifies PD: {reason.name}")
    return AuthorizationInfo(pd.order_id, approved, auth_code if approved else bytes(8), reason)


@dataclass(frozen=True)
class SettlementResult:
    authorization: AuthorizationResponse
    payment: PaymentResponse


def settle(pg, cb, mb, ai: AuthorizationInfo) -> SettlementResult:
    """Steps 25-28 without a bus: sign AR, debit at CB, credit at MB."""
    if not ai.approved:
        raise AuthorizationDeclined(f"authorization declined: {ai.reason.name}")
    ar = pg.sign_authorization(ai)
    pr = cb.capture(ar)
    pr = mb.credit(pr)
    return SettlementResult(ar, pr)


def deliver_goods(merchant, pr: PaymentResponse | None):
    if pr is None:
        raise NotSettled("no payment response for this order")
    if merchant.settled_payment != pr:
        merchant.verify_payment(pr)
    return merchant.goods_frame()
