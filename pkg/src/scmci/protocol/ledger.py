from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DoubleSettlement


@dataclass
class BankLedger:
    """Account balances in integer cents plus a journal keyed by order id.

    An order id may be journaled once; a second application raises
    :class:`DoubleSettlement` and leaves balances untouched.
    """

    balances: dict[str, int] = field(default_factory=dict)
    journal: list[tuple[bytes, str, int]] = field(default_factory=list)

    def has(self, order_id: bytes) -> bool:
        return any(oid == order_id for oid, _, _ in self.journal)

    def apply(self, account: str, order_id: bytes, delta: int, step: int | None = None) -> None:
        if account not in self.balances:
            raise KeyError(account)
        if self.has(order_id):
            raise DoubleSettlement(f"order {order_id!r} already settled", step=step)
        self.balances[account] += delta
        self.journal.append((order_id, account, delta))

    def delta_for(self, order_id: bytes) -> int:
        return sum(d for oid, _, d in self.journal if oid == order_id)
