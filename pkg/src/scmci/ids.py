"""Participant identifiers, shared by the wire format and the key tables."""

from __future__ import annotations

from enum import IntEnum


class Participant(IntEnum):
    C = 1
    M = 2
    PG = 3
    CB = 4
    MB = 5
    CA = 6
    TRUDY = 7

    @property
    def label(self) -> str:
        return self.name
