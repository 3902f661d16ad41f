from __future__ import annotations

from dataclasses import dataclass

from ..crypto import AsymmetricKeyPair, HashAlg, PublicKey, hash as digest_of, keygen_rsa, sign_digest, verify_digest
from ..errors import WireError
from ..ids import Participant
from ..wire import bytes_to_int, int_to_bytes, pack_fields, unpack_fields


@dataclass(frozen=True)
class Certificate:
    """A participant bound to its public key, signed by the CA (textbook RSA over a digest)."""

    subject: Participant
    public_key: PublicKey
    ca_signature: int

    def tbs_bytes(self) -> bytes:
        n, e = self.public_key
        return pack_fields(bytes([int(self.subject)]), int_to_bytes(n), int_to_bytes(e))

    def to_bytes(self) -> bytes:
        n, e = self.public_key
        return pack_fields(bytes([int(self.subject)]), int_to_bytes(n), int_to_bytes(e), int_to_bytes(self.ca_signature))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Certificate":
        subj, n, e, sig = unpack_fields(data, 4)
        if len(subj) != 1:
            raise WireError("bad certificate subject")
        try:
            subject = Participant(subj[0])
        except ValueError as exc:
            raise WireError(str(exc)) from exc
        return cls(subject, PublicKey(bytes_to_int(n), bytes_to_int(e)), bytes_to_int(sig))


def verify_certificate(ca_pub: PublicKey, cert: Certificate, alg: HashAlg = HashAlg.MD5) -> bool:
    return verify_digest(ca_pub, digest_of(alg, cert.tbs_bytes()), cert.ca_signature)


class CertificateAuthority:
    def __init__(self, keypair: AsymmetricKeyPair, alg: HashAlg = HashAlg.MD5):
        self.keypair = keypair
        self.alg = HashAlg(alg)

    @classmethod
    def from_seed(cls, seed: int, bits: int = 512, alg: HashAlg = HashAlg.MD5) -> "CertificateAuthority":
        return cls(keygen_rsa(seed, bits), alg)

    @property
    def public(self) -> PublicKey:
        return self.keypair.public

    def issue(self, subject: Participant, public_key: PublicKey) -> Certificate:
        unsigned = Certificate(Participant(subject), PublicKey(*public_key), 0)
        sig = sign_digest(self.keypair.private, digest_of(self.alg, unsigned.tbs_bytes()))
        return Certificate(unsigned.subject, unsigned.public_key, sig)

    def verify(self, cert: Certificate) -> bool:
        return verify_certificate(self.public, cert, self.alg)
