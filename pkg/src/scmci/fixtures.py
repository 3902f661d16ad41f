"""Fixture purchases, accounts and texts used by the CLI, analysis and tests."""

from __future__ import annotations

from .protocol.messages import OrderSummary, PurchaseDetails, luhn_valid

# known 128-bit key planted into attack scenarios; injected, never derived
PLANTED_SESSION_KEY = bytes.fromhex("FD68C116F776643E447A6EEDC77ECDFD")

# external reference entropies per stream; metadata only, not reproduced
REFERENCE_ENTROPY = {
    ("ORDER", "BASELINE"): 5.78,
    ("ORDER", "SCMCI"): 4.72,
    ("PAYMENT", "BASELINE"): 5.70,
    ("PAYMENT", "SCMCI"): 5.0,
}

MERCHANT_ACCOUNT = "MERCHANT-0001"


def luhn_complete(prefix15: str) -> str:
    """Append the check digit that makes ``prefix15`` Luhn-valid."""
    for d in "0123456789":
        if luhn_valid(prefix15 + d):
            return prefix15 + d
    raise AssertionError("unreachable")


_ITEMS = (
    b"1x ceramic mug; 2x tea sampler",
    b"1x hiking boots size 42",
    b"3x notebook A5 dotted",
    b"1x espresso grinder",
    b"2x wool socks; 1x scarf",
    b"1x paperback novel",
    b"4x AA batteries",
    b"1x desk lamp, warm white",
    b"1x cycling gloves M",
    b"6x sparkling water",
)
_AMOUNTS = (2500, 8999, 1350, 12900, 3400, 1299, 799, 4550, 2199, 0)

CARDS = tuple(luhn_complete(f"4111111111{i:05d}") for i in range(10))
DEFAULT_CARD = "4111111111111111"
BAD_LUHN_CARD = "4111111111111112"
DEFAULT_EXPIRY = "1228"


def purchase(index: int = 0, card: str | None = None) -> tuple[OrderSummary, PurchaseDetails]:
    """Fixture order ``index`` (0..9). Index 0 is the default purchase."""
    oid = f"ORD{index:05d}".encode()
    amount = _AMOUNTS[index]
    card = card or (DEFAULT_CARD if index == 0 else CARDS[index])
    os = OrderSummary(oid, _ITEMS[index], amount, "USD")
    pd = PurchaseDetails(oid, card, DEFAULT_EXPIRY, amount)
    return os, pd


N_PURCHASES = len(_ITEMS)

DEFAULT_CB_BALANCES = {DEFAULT_CARD: 10_000, **{c: 50_000 for c in CARDS}}
DEFAULT_MB_BALANCES = {MERCHANT_ACCOUNT: 0}

# plaintexts for the entropy comparison
ORDER_INFO = (
    b"Order summary: order ORD00001, 1x ceramic mug, 2x tea sampler, "
    b"subtotal 25.00 USD, shipping to store pickup, merchant Click&Mortar Ltd."
)
PAYMENT_INFO = (
    b"Payment details: card 4111111111111111, expiry 12/28, amount 25.00 USD, "
    b"order ORD00001, cardholder J. Doe."
)
