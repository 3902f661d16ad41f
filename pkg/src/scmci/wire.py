"""Bit-exact frame encoding and the transcript that logs every frame.

Frame layout (big-endian, 12-byte header)::

    version:1 | msg_type:1 | sender:1 | receiver:1 | seq:4 | payload_len:4 | payload

A transcript file is the concatenation of ``len:4 | frame`` records.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Iterator

from .errors import BadVersion, Truncated, UnknownType, WireError
from .ids import Participant

VERSION = 1
HEADER = struct.Struct(">BBBBII")
HEADER_SIZE = HEADER.size  # 12
MAX_SEQ = 0xFFFFFFFF


class MsgType(IntEnum):
    CERT_EXCHANGE = 1
    ENVELOPE = 2
    PURCHASE = 3
    ORDER_FWD = 4
    PD_FWD = 5
    AUTH_INFO = 6
    AUTH_RESP = 7
    PAY_RESP = 8
    GOODS = 9
    BASELINE_HYBRID = 10
    ABORT = 11


@dataclass(frozen=True)
class WireMessage:
    msg_type: MsgType
    sender: Participant
    receiver: Participant
    seq: int
    payload: bytes = b""
    version: int = VERSION

    def __post_init__(self):
        if not 0 <= self.seq <= MAX_SEQ:
            raise ValueError(f"seq out of range: {self.seq}")

    @property
    def direction(self) -> str:
        return f"{Participant(self.sender).name}->{Participant(self.receiver).name}"

    def __repr__(self) -> str:
        return (
            f"WireMessage({MsgType(self.msg_type).name}, {self.direction}, seq={self.seq}, "
            f"{len(self.payload)}B)"
        )


def encode(msg: WireMessage) -> bytes:
    return HEADER.pack(
        msg.version, int(msg.msg_type), int(msg.sender), int(msg.receiver), msg.seq, len(msg.payload)
    ) + bytes(msg.payload)


def decode_prefix(data: bytes, offset: int = 0) -> tuple[WireMessage, int]:
    """Decode one frame starting at ``offset``; return it and the offset just past it."""
    if len(data) - offset < HEADER_SIZE:
        raise Truncated(f"need {HEADER_SIZE} header bytes, have {len(data) - offset}")
    version, mtype, sender, receiver, seq, plen = HEADER.unpack_from(data, offset)
    if version != VERSION:
        raise BadVersion(f"version {version}")
    try:
        mtype = MsgType(mtype)
    except ValueError:
        raise UnknownType(f"msg_type {mtype}") from None
    try:
        sender, receiver = Participant(sender), Participant(receiver)
    except ValueError:
        raise WireError(f"unknown participant id in {sender}->{receiver}") from None
    start = offset + HEADER_SIZE
    if len(data) - start < plen:
        raise Truncated(f"payload_len {plen} exceeds the {len(data) - start} remaining bytes")
    payload = bytes(data[start : start + plen])
    return WireMessage(mtype, sender, receiver, seq, payload), start + plen


def decode(data: bytes) -> WireMessage:
    msg, end = decode_prefix(data)
    if end != len(data):
        raise WireError(f"{len(data) - end} trailing bytes after frame")
    return msg


# length-prefixed payload fields

_U16 = struct.Struct(">H")


def pack_fields(*fields: bytes) -> bytes:
    out = bytearray()
    for f in fields:
        if len(f) > 0xFFFF:
            raise ValueError("field longer than 65535 bytes")
        out += _U16.pack(len(f)) + f
    return bytes(out)


def unpack_fields(data: bytes, count: int) -> list[bytes]:
    """Inverse of :func:`pack_fields`; the data must hold exactly ``count`` fields."""
    fields, pos = [], 0
    for _ in range(count):
        if len(data) - pos < 2:
            raise Truncated("missing field length")
        (n,) = _U16.unpack_from(data, pos)
        pos += 2
        if len(data) - pos < n:
            raise Truncated("field runs past the end of the payload")
        fields.append(bytes(data[pos : pos + n]))
        pos += n
    if pos != len(data):
        raise WireError("trailing bytes after the last field")
    return fields


def int_to_bytes(value: int, length: int | None = None) -> bytes:
    if length is None:
        length = max(1, (value.bit_length() + 7) // 8)
    return value.to_bytes(length, "big")


def bytes_to_int(data: bytes) -> int:
    return int.from_bytes(data, "big")


class Flag(str, Enum):
    DELIVERED = "delivered"
    INTERCEPTED = "intercepted"
    MODIFIED = "modified"


class Origin(str, Enum):
    HONEST = "honest"
    INJECTED = "injected"


@dataclass(frozen=True)
class TranscriptEntry:
    direction: str
    message: WireMessage
    flag: Flag = Flag.DELIVERED
    origin: Origin = Origin.HONEST


@dataclass
class Transcript:
    """Append-only ordered log of frames."""

    _entries: list[TranscriptEntry] = field(default_factory=list)

    def append(self, message: WireMessage, flag: Flag = Flag.DELIVERED, origin: Origin = Origin.HONEST) -> None:
        self._entries.append(TranscriptEntry(message.direction, message, Flag(flag), Origin(origin)))

    @property
    def entries(self) -> tuple[TranscriptEntry, ...]:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[TranscriptEntry]:
        return iter(tuple(self._entries))

    def __getitem__(self, i: int) -> TranscriptEntry:
        return self._entries[i]

    def messages(self) -> list[WireMessage]:
        return [e.message for e in self._entries]

    def census(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self._entries:
            name = MsgType(e.message.msg_type).name
            out[name] = out.get(name, 0) + 1
        return out

    def seq_monotonic(self) -> bool:
        """True when honest frames carry strictly increasing seq per sender."""
        last: dict[int, int] = {}
        for e in self._entries:
            if e.origin is not Origin.HONEST:
                continue
            s = int(e.message.sender)
            if s in last and e.message.seq <= last[s]:
                return False
            last[s] = e.message.seq
        return True

    def to_bytes(self) -> bytes:
        return dump_frames(self.messages())

    def checksum(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def dump(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def from_messages(cls, messages: Iterable[WireMessage]) -> "Transcript":
        t = cls()
        for m in messages:
            t.append(m)
        return t

    @classmethod
    def from_bytes(cls, data: bytes) -> "Transcript":
        return cls.from_messages(load_frames(data))

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        return cls.from_bytes(Path(path).read_bytes())


_U32 = struct.Struct(">I")


def dump_frames(messages: Iterable[WireMessage]) -> bytes:
    out = bytearray()
    for m in messages:
        frame = encode(m)
        out += _U32.pack(len(frame)) + frame
    return bytes(out)


def load_frames(data: bytes) -> list[WireMessage]:
    out, pos = [], 0
    while pos < len(data):
        if len(data) - pos < 4:
            raise Truncated("dangling record length")
        (n,) = _U32.unpack_from(data, pos)
        pos += 4
        if len(data) - pos < n:
            raise Truncated("record runs past the end of the file")
        out.append(decode(data[pos : pos + n]))
        pos += n
    return out
