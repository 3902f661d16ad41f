from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

from . import ops


class HashAlg(str, Enum):
    MD5 = "md5"
    SHA256 = "sha256"

    @property
    def size(self) -> int:
        return 16 if self is HashAlg.MD5 else 32


@dataclass(frozen=True)
class Digest:
    algorithm: HashAlg
    bytes: bytes

    def __post_init__(self):
        if len(self.bytes) != self.algorithm.size:
            raise ValueError(f"{self.algorithm.value} digest must be {self.algorithm.size} bytes")

    def hex(self) -> str:
        return self.bytes.hex()


def hash(algorithm: HashAlg | str, data: bytes) -> Digest:  # noqa: A001
    alg = HashAlg(algorithm)
    ops.tick("hash")
    return Digest(alg, hashlib.new(alg.value, bytes(data)).digest())


def dual_digest(algorithm: HashAlg | str, os_bytes: bytes, pd_bytes: bytes) -> Digest:
    """H(H(os) || H(pd)): links an order to its payment without revealing either."""
    return link_digests(algorithm, hash(algorithm, os_bytes), hash(algorithm, pd_bytes))


def link_digests(algorithm: HashAlg | str, h_os: Digest, h_pd: Digest) -> Digest:
    return hash(algorithm, h_os.bytes + h_pd.bytes)
