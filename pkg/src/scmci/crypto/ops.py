"""Instrumentation: count primitive operations inside a ``with`` block.

Counters nest; an operation ticks every active counter. State lives in a
ContextVar so concurrent threads never see each other's counters.
"""

from __future__ import annotations

from collections import Counter
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator

OP_NAMES = ("rsa_enc", "rsa_dec", "sym_enc", "sym_dec", "hash")
PUBLIC_KEY_OPS = ("rsa_enc", "rsa_dec")

_active: ContextVar[tuple[Counter, ...]] = ContextVar("scmci_op_counters", default=())


def tick(op: str) -> None:
    for c in _active.get():
        c[op] += 1


@contextmanager
def counting(counter: Counter | None = None) -> Iterator[Counter]:
    counter = Counter() if counter is None else counter
    active = _active.get()
    if any(c is counter for c in active):
        yield counter
        return
    token = _active.set(active + (counter,))
    try:
        yield counter
    finally:
        _active.reset(token)


def public_key_ops(counter: Counter) -> int:
    return sum(counter[k] for k in PUBLIC_KEY_OPS)


def as_dict(counter: Counter) -> dict[str, int]:
    return {k: int(counter[k]) for k in OP_NAMES}
